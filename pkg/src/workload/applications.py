from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from model.application import FORBIDDEN, Application, EfficiencyMap, EfficiencyOverride, VirtualLink, VirtualNode
from model.problem.exception import ValidationProblem
from model.substrate import SubstrateNetwork

ROOT = "u"

ApplicationKind = Literal["chain", "tree", "accelerator", "gpu"]


class ApplicationSpec(BaseModel):
    """
    The application mix. The default set is two chains, a tree and an accelerator chain; a single
    repeated kind gives a homogeneous set.
    """

    model_config = ConfigDict(frozen=True)

    kinds: tuple[ApplicationKind, ...] = ("chain", "chain", "tree", "accelerator")
    vnf_min: int = Field(default=3, ge=1)
    vnf_max: int = Field(default=5, ge=1)
    size_mean: float = Field(default=50.0, gt=0)
    size_std: float = Field(default=30.0, ge=0)
    size_floor: float = Field(default=0.1, gt=0)
    accelerator_factor: float = Field(default=0.3, gt=0, le=1)
    seed: int = 0

    @model_validator(mode="after")
    def _check_range(self) -> "ApplicationSpec":
        if self.vnf_min > self.vnf_max:
            raise ValidationProblem(detail=f"VNF count range [{self.vnf_min}, {self.vnf_max}] is empty.")
        if not self.kinds:
            raise ValidationProblem(detail="At least one application kind is required.")
        if "tree" in self.kinds and self.vnf_min < 3:
            raise ValidationProblem(detail="Tree applications need at least 3 VNFs.")
        if {"accelerator", "gpu"} & set(self.kinds) and self.vnf_min < 2:
            raise ValidationProblem(detail="Accelerator and GPU applications need at least 2 VNFs.")
        return self

    @property
    def nominal_footprint(self) -> float:
        """Expected total VNF size of one application."""
        return (self.vnf_min + self.vnf_max) / 2 * self.size_mean


def _draw_sizes(spec: ApplicationSpec, rng: np.random.Generator, count: int) -> list[float]:
    return [float(s) for s in np.maximum(rng.normal(spec.size_mean, spec.size_std, size=count), spec.size_floor)]


def _chain_links(order: list[str], sizes: list[float]) -> list[VirtualLink]:
    return [
        VirtualLink(id=f"{parent}-{child}", parent=parent, child=child, size=size)
        for parent, child, size in zip(order, order[1:], sizes)
    ]


def _tree_links(vnfs: list[str], sizes: list[float]) -> list[VirtualLink]:
    """The root feeds the first VNF, which then splits the remaining ones into two branches."""
    head, rest = vnfs[0], vnfs[1:]
    cut = (len(rest) + 1) // 2
    links = [(ROOT, head)]
    for branch in (rest[:cut], rest[cut:]):
        links.extend(zip([head, *branch], branch))
    return [
        VirtualLink(id=f"{parent}-{child}", parent=parent, child=child, size=size)
        for (parent, child), size in zip(links, sizes)
    ]


def build_application(
    app_id: str,
    kind: ApplicationKind,
    spec: ApplicationSpec,
    rng: np.random.Generator,
    substrate: SubstrateNetwork | None = None,
) -> Application:
    count = int(rng.integers(spec.vnf_min, spec.vnf_max + 1))
    vnfs = [f"f{i}" for i in range(1, count + 1)]
    node_sizes = _draw_sizes(spec, rng, count)
    link_sizes = _draw_sizes(spec, rng, count)

    nodes = [VirtualNode(id=ROOT, size=0.0)] + [VirtualNode(id=v, size=s) for v, s in zip(vnfs, node_sizes)]
    if kind == "tree":
        links = _tree_links(vnfs, link_sizes)
    else:
        links = _chain_links([ROOT, *vnfs], link_sizes)

    overrides: list[EfficiencyOverride] = []
    if kind == "accelerator":
        # Any VNF with a successor can be the accelerator; its outgoing link shrinks.
        accelerator = vnfs[int(rng.integers(0, count - 1))]
        factor = spec.accelerator_factor
        links = [
            link.model_copy(update={"size": link.size * factor}) if link.parent == accelerator else link
            for link in links
        ]
    elif kind == "gpu":
        if substrate is None or not any(node.gpu for node in substrate.nodes):
            raise ValidationProblem(detail="GPU applications need a substrate with GPU nodes.")
        accelerated = vnfs[int(rng.integers(0, count))]
        for vnf in vnfs:
            for node in substrate.nodes:
                if node.gpu != (vnf == accelerated):
                    overrides.append(EfficiencyOverride(virtual=vnf, substrate=node.id, value=FORBIDDEN))

    return Application(
        id=app_id,
        kind=kind,
        root=ROOT,
        nodes=tuple(nodes),
        links=tuple(links),
        efficiency=EfficiencyMap(tuple(overrides)),
    )


def gen_applications(
    spec: ApplicationSpec,
    rng: np.random.Generator | None = None,
    substrate: SubstrateNetwork | None = None,
) -> tuple[Application, ...]:
    rng = rng if rng is not None else np.random.default_rng(spec.seed)
    counters: dict[str, int] = {}
    applications = []
    for kind in spec.kinds:
        counters[kind] = counters.get(kind, 0) + 1
        applications.append(build_application(f"{kind}-{counters[kind]}", kind, spec, rng, substrate))
    return tuple(applications)


def mean_footprint(applications: tuple[Application, ...], weights: dict[str, float] | None = None) -> float:
    """Total VNF size averaged over the application mix."""
    if not applications:
        raise ValidationProblem(detail="The application set is empty.")
    w = np.array([(weights or {}).get(app.id, 1.0) for app in applications], dtype=float)
    sizes = np.array([app.vnf_footprint for app in applications])
    return float(np.dot(w, sizes) / w.sum())
