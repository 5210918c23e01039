"""Terminal theme for gamelab.

Verdict tables read green/red; everything else stays in the cyan family.
"""

from dataclasses import dataclass

from rich.style import Style
from rich.theme import Theme


@dataclass
class LabTheme:
    """Colour palette."""

    HEADING = "#00FFFF"
    STATISTIC = "#7FDBFF"
    FRAME = "#00B3B3"
    FRAME_DIM = "#006666"
    MUTED = "#808080"

    PASS = "#00FF41"
    FAIL = "#FF0040"


THEME = Theme({
    "verdict.pass": Style(color=LabTheme.PASS, bold=True),
    "verdict.fail": Style(color=LabTheme.FAIL, bold=True),
    "error": Style(color=LabTheme.FAIL, bold=True),

    "title": Style(color=LabTheme.HEADING, bold=True),
    "subtitle": Style(color=LabTheme.STATISTIC),
    "border": Style(color=LabTheme.FRAME),
    "border.dim": Style(color=LabTheme.FRAME_DIM),
    "text.dim": Style(color=LabTheme.MUTED),
})


class Symbols:
    PASS = "✓"
    FAIL = "✗"
    ARROW_RIGHT = "▸"
