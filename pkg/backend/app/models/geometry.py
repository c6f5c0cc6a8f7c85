from typing import List, Tuple

from pydantic import BaseModel, ConfigDict, Field


class AdjacencyStructure(BaseModel):
    """Threshold graph; neighbourhoods are stored as int bitmasks (bit j set iff edge i-j)."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=0)
    neighbors: Tuple[int, ...]

    def has_edge(self, i: int, j: int) -> bool:
        return i != j and bool((self.neighbors[i] >> j) & 1)

    def degree(self, i: int) -> int:
        return bin(self.neighbors[i]).count("1")

    def edges(self) -> List[Tuple[int, int]]:
        return [(i, j) for i in range(self.n) for j in range(i + 1, self.n) if self.has_edge(i, j)]

    @property
    def edge_count(self) -> int:
        return sum(self.degree(i) for i in range(self.n)) // 2

    @classmethod
    def from_edges(cls, n: int, edges) -> "AdjacencyStructure":
        masks = [0] * n
        for i, j in edges:
            if i == j:
                continue
            masks[i] |= 1 << j
            masks[j] |= 1 << i
        return cls(n=n, neighbors=tuple(masks))


class EnclosingBall(BaseModel):
    model_config = ConfigDict(frozen=True)

    center: Tuple[float, ...]
    radius: float = Field(ge=0)
    support: Tuple[int, ...]
