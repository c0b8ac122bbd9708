from pydantic import BaseModel, ConfigDict

from model.application import Application
from model.problem.exception import InvalidEmbeddingProblem
from model.request import Request
from model.substrate import SubstrateNetwork


class Embedding(BaseModel):
    """
    An unsplittable mapping: every virtual node sits on one substrate node and every virtual link
    follows one simple substrate path, given as the sequence of visited nodes. A link whose
    endpoints are collocated follows the single-node path (host,) and uses no link capacity.
    """

    model_config = ConfigDict(frozen=True)

    node_map: dict[str, str]
    paths: dict[str, tuple[str, ...]]
    request_id: int | None = None
    planned: bool = False

    def path_links(self, virtual_link: str, substrate: SubstrateNetwork) -> tuple[str, ...]:
        hops = self.paths[virtual_link]
        return tuple(substrate.link_between(u, v).id for u, v in zip(hops, hops[1:]))

    def maps(self, virtual: str, element: str, substrate: SubstrateNetwork) -> bool:
        if virtual in self.node_map:
            return self.node_map[virtual] == element
        return element in self.path_links(virtual, substrate)

    def bind(self, request_id: int, planned: bool) -> "Embedding":
        return self.model_copy(update={"request_id": request_id, "planned": planned})

    def describe_nodes(self) -> str:
        return ";".join(f"{virtual}:{host}" for virtual, host in self.node_map.items())

    def describe_paths(self) -> str:
        return "|".join(f"{virtual}:{'>'.join(hops)}" for virtual, hops in self.paths.items())

    @classmethod
    def parse(cls, node_map: str, paths: str) -> "Embedding":
        """Inverse of describe_nodes/describe_paths, used when replaying event logs."""
        nodes = dict(item.split(":", 1) for item in node_map.split(";") if item)
        routed = {
            virtual: tuple(hops.split(">"))
            for virtual, hops in (item.split(":", 1) for item in paths.split("|") if item)
        }
        return cls(node_map=nodes, paths=routed)


def validate_embedding(
    embedding: Embedding,
    application: Application,
    substrate: SubstrateNetwork,
    origin: str | None = None,
) -> None:
    """Raise InvalidEmbeddingProblem unless the embedding is a complete, valid mapping of the application."""

    def fail(reason: str) -> None:
        raise InvalidEmbeddingProblem(
            detail=f"Embedding of application '{application.id}' is invalid: {reason}",
            instance=None if embedding.request_id is None else f"request:{embedding.request_id}",
        )

    if set(embedding.node_map) != set(application.node_by_id):
        fail("node map does not cover exactly the virtual nodes")
    if set(embedding.paths) != set(application.link_by_id):
        fail("path map does not cover exactly the virtual links")

    for virtual, host in embedding.node_map.items():
        if host not in substrate.node_by_id:
            fail(f"'{virtual}' is mapped to unknown substrate node '{host}'")
        if application.efficiency.forbids(virtual, host):
            fail(f"'{virtual}' may not be hosted on '{host}'")
    if origin is not None and embedding.node_map[application.root] != origin:
        fail(f"root is not pinned to origin '{origin}'")

    for link in application.links:
        hops = embedding.paths[link.id]
        if not hops or hops[0] != embedding.node_map[link.parent] or hops[-1] != embedding.node_map[link.child]:
            fail(f"path of '{link.id}' does not connect the hosts of its endpoints")
        if len(set(hops)) != len(hops):
            fail(f"path of '{link.id}' is not simple")
        for u, v in zip(hops, hops[1:]):
            if frozenset((u, v)) not in substrate.link_by_endpoints:
                fail(f"path of '{link.id}' uses the missing connection {u}-{v}")
            if application.efficiency.forbids(link.id, substrate.link_between(u, v).id):
                fail(f"'{link.id}' may not traverse '{substrate.link_between(u, v).id}'")


def validate_for_request(embedding: Embedding, request: Request, application: Application, substrate) -> None:
    if application.id != request.app:
        raise InvalidEmbeddingProblem(detail=f"Request {request.id} is not an instance of '{application.id}'.")
    validate_embedding(embedding, application, substrate, origin=request.origin)
