"""Protocol definition for gated presets."""

from typing import Any, Protocol

from polishforge.codec import WitnessSet
from polishforge.models import PresentationStream
from polishforge.spaceterm import SpaceTerm


class GatedPreset(Protocol):
    """Builds the stream of a gated construction from a witness table."""

    name: str
    arity: int

    def build(self, witness: WitnessSet, budget: int, **options: Any) -> PresentationStream:
        """Stream with `budget` stages; gated points appear once their row is found."""
        ...

    def skeleton_term(self, witness: WitnessSet) -> SpaceTerm:
        """The space presented when no gate ever fires."""
        ...
