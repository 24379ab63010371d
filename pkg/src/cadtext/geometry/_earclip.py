"""Ear-clipping triangulation of polygons with holes.

Holes are eliminated by bridging each hole's leftmost vertex to a visible
outer vertex, then the resulting weakly simple ring is ear-clipped.
Orientation convention throughout: outer ring counterclockwise (positive
signed area, y up), holes clockwise. Output triangles are CCW index
triples into the caller's vertex list; bridge copies reuse the original
vertex indices so downstream meshes stay index-consistent.
"""

from __future__ import annotations


class _Node:
    __slots__ = ("i", "x", "y", "prev", "next")

    def __init__(self, i, x, y):
        self.i = i
        self.x = x
        self.y = y
        self.prev = None
        self.next = None


def _cross(p, q, r):
    """2x signed area of (p, q, r); positive for a CCW turn."""
    return (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x)


def _equals(a, b):
    return a.x == b.x and a.y == b.y


def _insert_node(i, x, y, last):
    node = _Node(i, x, y)
    if last is None:
        node.prev = node
        node.next = node
    else:
        node.next = last.next
        node.prev = last
        last.next.prev = node
        last.next = node
    return node


def _remove_node(node):
    node.next.prev = node.prev
    node.prev.next = node.next


def _linked_ring(indices, coords, last=None):
    for i in indices:
        last = _insert_node(i, coords[i][0], coords[i][1], last)
    return last


def _filter_points(start, end=None):
    """Remove duplicate and exactly collinear points."""
    if start is None:
        return None
    if end is None:
        end = start
    p = start
    again = True
    while again or p is not end:
        again = False
        if _equals(p, p.next) or _cross(p.prev, p, p.next) == 0:
            _remove_node(p)
            p = end = p.prev
            if p is p.next:
                return None
            again = True
        else:
            p = p.next
    return end


def _point_in_triangle(ax, ay, bx, by, cx, cy, px, py):
    """Boundary-inclusive containment in CCW triangle (a, b, c)."""
    return (
        (bx - ax) * (py - ay) - (by - ay) * (px - ax) >= 0
        and (cx - bx) * (py - by) - (cy - by) * (px - bx) >= 0
        and (ax - cx) * (py - cy) - (ay - cy) * (px - cx) >= 0
    )


def _is_ear(ear):
    a, b, c = ear.prev, ear, ear.next
    if _cross(a, b, c) <= 0:
        return False
    p = c.next
    while p is not a:
        if (
            not (_equals(p, a) or _equals(p, b) or _equals(p, c))
            and _point_in_triangle(a.x, a.y, b.x, b.y, c.x, c.y, p.x, p.y)
            and _cross(p.prev, p, p.next) <= 0
        ):
            return False
        p = p.next
    return True


def _locally_inside(a, b):
    """Whether the diagonal from a toward b enters the polygon interior."""
    if _cross(a.prev, a, a.next) > 0:
        return _cross(a, a.next, b) >= 0 and _cross(a, b, a.prev) >= 0
    return _cross(a, a.prev, b) <= 0 or _cross(a, b, a.next) <= 0


def _on_segment(p, q, r):
    return (
        min(p.x, r.x) <= q.x <= max(p.x, r.x)
        and min(p.y, r.y) <= q.y <= max(p.y, r.y)
    )


def _sign(v):
    return (v > 0) - (v < 0)


def _segments_intersect(p1, q1, p2, q2):
    o1 = _sign(_cross(p1, q1, p2))
    o2 = _sign(_cross(p1, q1, q2))
    o3 = _sign(_cross(p2, q2, p1))
    o4 = _sign(_cross(p2, q2, q1))
    if o1 != o2 and o3 != o4:
        return True
    if o1 == 0 and _on_segment(p1, p2, q1):
        return True
    if o2 == 0 and _on_segment(p1, q2, q1):
        return True
    if o3 == 0 and _on_segment(p2, p1, q2):
        return True
    if o4 == 0 and _on_segment(p2, q1, q2):
        return True
    return False


def _intersects_polygon(start, a, b):
    """Does segment (a, b) cross any ring edge not incident to a or b?"""
    p = start
    while True:
        if (
            p.i != a.i
            and p.next.i != a.i
            and p.i != b.i
            and p.next.i != b.i
            and _segments_intersect(p, p.next, a, b)
        ):
            return True
        p = p.next
        if p is start:
            return False


def _middle_inside(start, a, b):
    mx = (a.x + b.x) / 2
    my = (a.y + b.y) / 2
    inside = False
    p = start
    while True:
        if ((p.y > my) != (p.next.y > my)) and p.next.y != p.y:
            x = (my - p.y) * (p.next.x - p.x) / (p.next.y - p.y) + p.x
            if x > mx:
                inside = not inside
        p = p.next
        if p is start:
            return inside


def _valid_diagonal(a, b):
    return (
        a.next.i != b.i
        and a.prev.i != b.i
        and not _intersects_polygon(a, a, b)
        and _locally_inside(a, b)
        and _locally_inside(b, a)
        and _middle_inside(a, a, b)
        and (_cross(a.prev, a, b) != 0 or _cross(a, b, b.next) != 0)
    )


def _split_polygon(a, b):
    """Split the ring with diagonal a-b, returning the second half."""
    a2 = _Node(a.i, a.x, a.y)
    b2 = _Node(b.i, b.x, b.y)
    an = a.next
    bp = b.prev
    a.next = b
    b.prev = a
    a2.next = an
    an.prev = a2
    b2.next = a2
    a2.prev = b2
    bp.next = b2
    b2.prev = bp
    return b2


def _cure_local_intersections(start, triangles):
    p = start
    while True:
        a, b = p.prev, p.next.next
        if (
            not _equals(a, b)
            and _segments_intersect(a, p, p.next, b)
            and _locally_inside(a, b)
            and _locally_inside(b, a)
        ):
            if _cross(a, p, b) > 0:
                triangles.append((a.i, p.i, b.i))
            _remove_node(p)
            _remove_node(p.next)
            p = start = b
        p = p.next
        if p is start:
            break
    return _filter_points(p)


def _earcut_linked(ear, triangles, pass_=0):
    if ear is None:
        return
    stop = ear
    while ear.prev is not ear.next:
        prev_node = ear.prev
        next_node = ear.next
        if _is_ear(ear):
            triangles.append((prev_node.i, ear.i, next_node.i))
            _remove_node(ear)
            ear = next_node.next
            stop = next_node.next
            continue
        ear = next_node
        if ear is stop:
            if pass_ == 0:
                _earcut_linked(_filter_points(ear), triangles, 1)
            elif pass_ == 1:
                ear = _cure_local_intersections(ear, triangles)
                _earcut_linked(ear, triangles, 2)
            elif pass_ == 2:
                _split_earcut(ear, triangles)
            return


def _split_earcut(start, triangles):
    a = start
    while True:
        b = a.next.next
        while b is not a.prev:
            if a.i != b.i and _valid_diagonal(a, b):
                c = _split_polygon(a, b)
                a = _filter_points(a, a.next)
                c = _filter_points(c, c.next)
                _earcut_linked(a, triangles)
                _earcut_linked(c, triangles)
                return
            b = b.next
        a = a.next
        if a is start:
            return


def _leftmost(start):
    p = start
    best = start
    while True:
        if p.x < best.x or (p.x == best.x and p.y < best.y):
            best = p
        p = p.next
        if p is start:
            return best


def _find_hole_bridge(hole, outer):
    """Visible outer vertex for the hole's leftmost vertex (leftward ray)."""
    p = outer
    hx, hy = hole.x, hole.y
    qx = -float("inf")
    m = None
    while True:
        if p.next.y != p.y and min(p.y, p.next.y) <= hy <= max(p.y, p.next.y):
            x = p.x + (hy - p.y) * (p.next.x - p.x) / (p.next.y - p.y)
            if qx < x <= hx:
                qx = x
                m = p if p.x < p.next.x else p.next
                if x == hx:
                    return m
        p = p.next
        if p is outer:
            break
    if m is None:
        return None
    # Check for reflex vertices inside the triangle spanned by the hole
    # point, the ray hit, and the candidate; pick the one with the
    # smallest angle from the ray if any.
    stop = m
    mx, my = m.x, m.y
    tan_min = float("inf")
    p = m
    while True:
        if (
            mx <= p.x <= hx
            and p.x != hx
            and _point_in_triangle(
                qx if hy < my else hx, hy, mx, my, hx if hy < my else qx, hy, p.x, p.y
            )
        ):
            tan = abs(hy - p.y) / (hx - p.x)
            if _locally_inside(p, hole) and (
                tan < tan_min or (tan == tan_min and p.x > m.x)
            ):
                m = p
                tan_min = tan
        p = p.next
        if p is stop:
            break
    return m


def _eliminate_hole(hole, outer):
    bridge = _find_hole_bridge(hole, outer)
    if bridge is None:
        return outer
    bridge_reverse = _split_polygon(bridge, hole)
    _filter_points(bridge_reverse, bridge_reverse.next)
    return _filter_points(bridge, bridge.next)


def triangulate(rings):
    """Triangulate a polygon with holes.

    `rings` is a list of (N, 2) float sequences: the outer ring first
    (CCW), then hole rings (CW), all open (no repeated last vertex).
    Returns a list of (i, j, k) CCW triangles indexing the concatenation
    of all ring vertices.
    """
    coords = [tuple(pt) for ring in rings for pt in ring]
    offsets = []
    total = 0
    for ring in rings:
        offsets.append(total)
        total += len(ring)
    outer = _linked_ring(range(offsets[0], offsets[0] + len(rings[0])), coords)
    outer = _filter_points(outer)
    if outer is None:
        return []
    hole_nodes = []
    for ring, off in zip(rings[1:], offsets[1:]):
        ring_list = _linked_ring(range(off, off + len(ring)), coords)
        ring_list = _filter_points(ring_list)
        if ring_list is not None:
            hole_nodes.append(_leftmost(ring_list))
    hole_nodes.sort(key=lambda n: (n.x, n.y))
    for hole in hole_nodes:
        outer = _eliminate_hole(hole, outer)
        if outer is None:
            return []
    triangles = []
    _earcut_linked(outer, triangles)
    return triangles
