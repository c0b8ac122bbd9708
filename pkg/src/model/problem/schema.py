from typing import Optional, List

from pydantic import BaseModel


class Problem(BaseModel):
    """Model of the problem document printed on stderr when a command fails."""

    type: str
    title: str
    exit_code: int
    detail: Optional[str] = None
    instance: Optional[str] = None
    errors: Optional[List[dict]] = None
