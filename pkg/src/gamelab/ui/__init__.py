"""gamelab UI components."""

from gamelab.ui.theme import THEME, LabTheme

__all__ = [
    "LabTheme",
    "THEME",
]
