"""Static SVG of stored frames inside the unit disc."""

from __future__ import annotations

import math
from pathlib import Path

from .exact_forms import circle_barrier

VIEWBOX = "-1.05 -1.05 2.1 2.1"


def _num(v: float) -> str:
    return format(float(v), ".17g")


def emit_svg(traj, every: int, path, barriers=()) -> Path:
    """Unit circle, every ``every``-th frame as a polyline, optional barrier circles.

    The y axis is flipped so the picture has the usual orientation. Barrier
    circles are clipped to the disc.
    """
    if every < 1:
        raise ValueError(f"every must be at least 1, got {every}")
    lines = [
        '<svg xmlns="http://www.w3.org/2000/svg" viewBox="%s">' % VIEWBOX,
        '<defs><clipPath id="disc"><circle cx="0" cy="0" r="1"/></clipPath></defs>',
        '<g transform="scale(1,-1)" fill="none" stroke-width="0.004">',
        '<circle class="boundary" cx="0" cy="0" r="1" stroke="black"/>',
    ]
    for theta in barriers:
        b = circle_barrier(theta)
        lines.append(
            '<circle class="barrier" cx="0" cy="%s" r="%s" stroke="red" clip-path="url(#disc)"/>'
            % (_num(b.center_y), _num(b.radius))
        )
    for k in range(0, len(traj.curves), every):
        pts = " ".join(f"{_num(x)},{_num(y)}" for x, y in traj.curves[k].nodes)
        lines.append(f'<polyline class="frame" points="{pts}" stroke="blue"/>')
    lines += ["</g>", "</svg>", ""]
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text("\n".join(lines))
    return p


def frame_count(n_frames: int, every: int) -> int:
    return math.ceil(n_frames / every)
