"""Independent brute-force references the tests compare the library against.

Everything here is written the slow, obvious way (per-pixel loops, exhaustive
search over subsets) and deliberately shares no code with the package, so an
agreement between the two is meaningful evidence and not a tautology.
All functions work on plain Python lists.
"""

from itertools import combinations


def naive_bbox_area(y1: int, x1: int, y2: int, x2: int) -> int:
    return (y2 - y1) * (x2 - x1)


def naive_rle_decode(counts, height: int, width: int):
    """Column-major run expansion; returns a row-major nested list of bools."""
    flat = []
    value = False
    for count in counts:
        flat.extend([value] * count)
        value = not value
    if len(flat) != height * width:
        raise ValueError(f"counts cover {len(flat)} pixels, mask has {height * width}")
    return [[flat[x * height + y] for x in range(width)] for y in range(height)]


def naive_rle_encode(grid):
    """Column-major run lengths starting with a zero run (possibly empty)."""
    height = len(grid)
    width = len(grid[0])
    flat = [grid[y][x] for x in range(width) for y in range(height)]
    counts = []
    value = False
    run = 0
    for bit in flat:
        if bool(bit) == value:
            run += 1
        else:
            counts.append(run)
            value = not value
            run = 1
    counts.append(run)
    return counts


def naive_union(masks):
    """Pixelwise OR over a non-empty list of nested bool lists."""
    height = len(masks[0])
    width = len(masks[0][0])
    return [
        [any(mask[y][x] for mask in masks) for x in range(width)]
        for y in range(height)
    ]


def naive_composite(background, source, mask):
    """Per-pixel select: source where mask, else background.

    All three arguments are nested lists (pixels are (r, g, b) tuples).
    """
    height = len(background)
    width = len(background[0])
    return [
        [source[y][x] if mask[y][x] else background[y][x] for x in range(width)]
        for y in range(height)
    ]


def _beats(a, b):
    """True when person a outranks person b (larger area, id breaks ties)."""
    (id_a, area_a), (id_b, area_b) = a, b
    if area_a != area_b:
        return area_a > area_b
    return id_a < id_b


def naive_rank(persons):
    """Rank by repeated extraction of the dominant person.

    persons is a list of (instance_id, area) pairs; returns instance_ids in
    rank order.
    """
    remaining = list(persons)
    order = []
    while remaining:
        best = remaining[0]
        for candidate in remaining[1:]:
            if _beats(candidate, best):
                best = candidate
        order.append(best[0])
        remaining.remove(best)
    return order


def naive_top_n(persons, n):
    """The unique size-min(n, len) subset whose members outrank all non-members.

    Exhaustive search over all subsets of that size.
    """
    k = min(n, len(persons))
    by_id = {pid: (pid, area) for pid, area in persons}
    ids = sorted(by_id)
    for chosen in combinations(ids, k):
        rest = [i for i in ids if i not in chosen]
        if all(_beats(by_id[c], by_id[r]) for c in chosen for r in rest):
            return set(chosen)
    raise AssertionError("no dominating subset found; ranking order is broken")


def naive_explicit_ids(persons, wanted):
    """Valid iff every wanted id is a person; then the selection is the ids."""
    present = {pid for pid, _ in persons}
    missing = set(wanted) - present
    if missing:
        return None
    return set(wanted)
