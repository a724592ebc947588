"""Registry for gated presets."""

from polishforge.presets.base import GatedPreset
from polishforge.presets.pd1 import PD1Preset
from polishforge.presets.xd import XDPreset
from polishforge.presets.zd2 import ZD2Preset

_PRESETS: dict[str, type[GatedPreset]] = {
    "xd": XDPreset,
    "zd2": ZD2Preset,
    "pd1": PD1Preset,
}


def list_presets() -> list[str]:
    """Return list of available preset IDs."""
    return list(_PRESETS.keys())


def get_preset(preset_id: str) -> GatedPreset | None:
    """Get a preset by ID, or None if not found."""
    preset_class = _PRESETS.get(preset_id)
    if preset_class is None:
        return None
    return preset_class()
