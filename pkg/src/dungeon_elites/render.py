"""Text and SVG rendering of decoded levels."""

from __future__ import annotations

from .decoder import LevelGrid

_CELL = 3  # characters per grid cell in text mode


def render_text(grid: LevelGrid) -> str:
    """Character-grid view: S/G for start/goal, # for rooms, k<id> for key
    rooms, digits for enemy counts, |<id>| for locked corridors."""
    cells = {**{pos: None for pos in grid.rooms},
             **{pos: None for pos in grid.corridors}}
    xs = [x for x, _y in cells]
    ys = [y for _x, y in cells]
    lines = []
    for y in range(min(ys), max(ys) + 1):
        line = []
        for x in range(min(xs), max(xs) + 1):
            line.append(_cell_text((x, y), grid).center(_CELL))
        lines.append("".join(line).rstrip())
    return "\n".join(lines) + "\n"


def _cell_text(pos, grid: LevelGrid) -> str:
    if pos in grid.rooms:
        room = grid.rooms[pos]
        if pos == grid.start:
            return "S"
        if pos == grid.goal:
            return "G"
        if room.room_type.is_key:
            return f"k{room.room_type.pair_id}"
        if room.enemies > 0:
            return str(min(room.enemies, 9))
        return "#"
    if pos in grid.corridors:
        corridor = grid.corridors[pos]
        if corridor.lock_id is not None:
            return f"|{corridor.lock_id}|"
        return "."
    return ""


_LOCK_COLORS = ["#c0392b", "#2980b9", "#27ae60", "#8e44ad",
                "#d35400", "#16a085", "#7f8c8d", "#f39c12"]


def _lock_color(lock_id: int) -> str:
    return _LOCK_COLORS[(lock_id - 1) % len(_LOCK_COLORS)]


def render_svg(grid: LevelGrid, scale: int = 24) -> str:
    """Rooms as squares shaded by enemy count (deeper red means more),
    corridors as small squares, locked corridors and keys color-matched."""
    xs = [x for x, _y in list(grid.rooms) + list(grid.corridors)]
    ys = [y for _x, y in list(grid.rooms) + list(grid.corridors)]
    min_x, min_y = min(xs), min(ys)
    width = (max(xs) - min_x + 1) * scale
    height = (max(ys) - min_y + 1) * scale
    max_enemies = max((r.enemies for r in grid.rooms.values()), default=0)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" '
             f'width="{width}" height="{height}" '
             f'viewBox="0 0 {width} {height}">',
             f'<rect width="{width}" height="{height}" fill="#f5f5f5"/>']
    for pos, corridor in sorted(grid.corridors.items()):
        cx = (pos[0] - min_x) * scale
        cy = (pos[1] - min_y) * scale
        pad = scale // 4
        color = ("#cccccc" if corridor.lock_id is None
                 else _lock_color(corridor.lock_id))
        parts.append(f'<rect x="{cx + pad}" y="{cy + pad}" '
                     f'width="{scale - 2 * pad}" height="{scale - 2 * pad}" '
                     f'fill="{color}" stroke="#333"/>')
    for pos, room in sorted(grid.rooms.items()):
        cx = (pos[0] - min_x) * scale
        cy = (pos[1] - min_y) * scale
        if pos == grid.goal:
            fill = "#6c3483"
        elif room.enemies > 0 and max_enemies > 0:
            shade = 255 - int(155 * room.enemies / max_enemies)
            fill = f"rgb(255,{shade},{shade})"
        else:
            fill = "#ffffff"
        parts.append(f'<rect x="{cx}" y="{cy}" width="{scale}" '
                     f'height="{scale}" fill="{fill}" stroke="#333"/>')
        if pos == grid.start:
            pad = scale // 3
            parts.append(f'<rect x="{cx + pad}" y="{cy + pad}" '
                         f'width="{scale - 2 * pad}" height="{scale - 2 * pad}" '
                         f'fill="#6c3483"/>')
        elif pos == grid.goal:
            pad = scale // 3
            parts.append(f'<rect x="{cx + pad}" y="{cy + pad}" '
                         f'width="{scale - 2 * pad}" height="{scale - 2 * pad}" '
                         f'fill="#ffffff"/>')
        if room.room_type.is_key:
            parts.append(f'<circle cx="{cx + scale // 2}" cy="{cy + scale // 2}" '
                         f'r="{scale // 4}" '
                         f'fill="{_lock_color(room.room_type.pair_id)}" '
                         f'stroke="#333"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
