"""Periodic square-lattice geometry: links, plaquettes, stars, loops, dual surfaces.

Canonical link numbering is direction-major:

    link(mu, site) = mu * L^d + linear(site),  linear = x1 + L*x2 (+ L^2*x3)

with one qubit per link. All coordinates wrap mod L (the lattice is a
d-torus). Physics downstream is numbering-invariant; tests permute link
ids to assert it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence, Tuple

Coords = Tuple[int, ...]


@dataclass(frozen=True)
class LoopSpec:
    """Closed walk on the direct lattice, as a link multiset with metadata."""

    links: Tuple[int, ...]
    perimeter: int
    enclosed_area: int  # plaquette count; 0 for non-contractible loops
    contractible: bool
    direction: int = -1  # winding axis, non-contractible loops only

    def link_set(self) -> frozenset:
        """Links appearing an odd number of times (sigma_z pairs cancel)."""
        odd = set()
        for l in self.links:
            odd.symmetric_difference_update({l})
        return frozenset(odd)


@dataclass(frozen=True)
class DualSurface:
    """Non-contractible (d-1)-surface on the dual lattice, as pierced links."""

    links: frozenset
    direction: int


@dataclass(frozen=True)
class LatticeSpec:
    d: int
    L: int
    num_sites: int
    num_links: int
    num_plaquettes: int
    planes: Tuple[Tuple[int, int], ...] = field(repr=False)

    def sites(self):
        return itertools.product(*(range(self.L) for _ in range(self.d)))


def build(d: int, L: int) -> LatticeSpec:
    """Geometry of the d-dimensional periodic lattice of linear size L."""
    if d not in (2, 3):
        raise ValueError(f"unsupported dimension d={d}")
    if L < 2:
        raise ValueError(f"linear size must be >= 2, got {L}")
    num_sites = L**d
    num_links = d * num_sites
    planes = tuple((mu, nu) for mu in range(d) for nu in range(mu + 1, d))
    num_plaquettes = len(planes) * num_sites
    assert num_plaquettes == num_links * (d - 1) // 2
    return LatticeSpec(d, L, num_sites, num_links, num_plaquettes, planes)


def site_index(lat: LatticeSpec, coords: Sequence[int]) -> int:
    idx = 0
    for ax in reversed(range(lat.d)):
        idx = idx * lat.L + (coords[ax] % lat.L)
    return idx


def link_index(lat: LatticeSpec, mu: int, coords: Sequence[int]) -> int:
    if not 0 <= mu < lat.d:
        raise ValueError(f"invalid axis {mu}")
    return mu * lat.num_sites + site_index(lat, coords)


def _shift(coords: Sequence[int], ax: int, step: int) -> Coords:
    c = list(coords)
    c[ax] += step
    return tuple(c)


def _check_site(lat: LatticeSpec, coords: Sequence[int]):
    if len(coords) != lat.d:
        raise ValueError(f"site needs {lat.d} coordinates, got {len(coords)}")
    if any(not 0 <= x < lat.L for x in coords):
        raise ValueError(f"site {tuple(coords)} outside [0,{lat.L})^{lat.d}")


def plaquette_links(lat: LatticeSpec, plane: Tuple[int, int], coords: Sequence[int]) -> Tuple[int, int, int, int]:
    """The four links bounding the elementary plaquette at `coords` in `plane`."""
    mu, nu = plane
    if not (0 <= mu < nu < lat.d):
        raise ValueError(f"invalid plane {plane}")
    _check_site(lat, coords)
    return (
        link_index(lat, mu, coords),
        link_index(lat, nu, _shift(coords, mu, 1)),
        link_index(lat, mu, _shift(coords, nu, 1)),
        link_index(lat, nu, coords),
    )


def all_plaquettes(lat: LatticeSpec):
    """Plaquettes in canonical order: plane-major, then linear site index."""
    out = []
    for plane in lat.planes:
        for coords in sorted(lat.sites(), key=lambda c: site_index(lat, c)):
            out.append(plaquette_links(lat, plane, coords))
    return out


def star_links(lat: LatticeSpec, coords: Sequence[int]) -> Tuple[int, ...]:
    """The 2d links ending at a site: d outgoing plus d incoming (periodic)."""
    _check_site(lat, coords)
    out = []
    for mu in range(lat.d):
        out.append(link_index(lat, mu, coords))
        out.append(link_index(lat, mu, _shift(coords, mu, -1)))
    return tuple(out)


def _boundary_of_plaquettes(lat: LatticeSpec, cells) -> Tuple[int, ...]:
    """Symmetric difference of plaquette link sets: the boundary cycle."""
    odd = set()
    for plane, coords in cells:
        odd.symmetric_difference_update(plaquette_links(lat, plane, coords))
    return tuple(sorted(odd))


def contour_from_plaquettes(lat: LatticeSpec, cells) -> LoopSpec:
    """Wilson contour bounding a set of elementary plaquettes.

    The boundary must be a genuine cycle of 4 + 2m links; degenerate unions
    whose boundaries cancel entirely are rejected.
    """
    links = _boundary_of_plaquettes(lat, cells)
    if not links:
        raise ValueError("plaquette set has empty boundary")
    return LoopSpec(
        links=links,
        perimeter=len(links),
        enclosed_area=len(list(cells)),
        contractible=True,
    )


def rectangle_contour(
    lat: LatticeSpec,
    a: int,
    b: int,
    plane: Tuple[int, int] = (0, 1),
    origin: Sequence[int] = None,
) -> LoopSpec:
    """Boundary of the a-by-b rectangle of plaquettes: perimeter 2(a+b), area a*b.

    An extent equal to L wraps the torus and makes opposite edges coincide,
    which collapses the sigma_z product; such rectangles are rejected.
    """
    mu, nu = plane
    if not (0 <= mu < nu < lat.d):
        raise ValueError(f"invalid plane {plane}")
    if a < 1 or b < 1:
        raise ValueError("rectangle extents must be positive")
    if a >= lat.L or b >= lat.L:
        raise ValueError(
            f"{a}x{b} rectangle does not fit a size-{lat.L} lattice without wrapping"
        )
    if origin is None:
        origin = (0,) * lat.d
    _check_site(lat, origin)
    cells = [
        (plane, _shift(_shift(origin, mu, i), nu, j))
        for i in range(a)
        for j in range(b)
    ]
    links = _boundary_of_plaquettes(lat, cells)
    loop = LoopSpec(links=links, perimeter=2 * (a + b), enclosed_area=a * b, contractible=True)
    assert len(links) == loop.perimeter
    return loop


def wilson_contours(lat: LatticeSpec) -> dict:
    """The standard contours c1, c2, c3 with perimeters 4:6:8 and areas 1:2:3.

    c1 is one plaquette. Where straight 1x2 / 1x3 rectangles fit without
    wrapping they are used; on lattices too small for that (L=3 for c3,
    L=2 for both) the contours are chains of 2 or 3 plaquettes joined over
    single shared edges, which have the same perimeter and area. Chains may
    bend within a plane or across planes (d=3); either way the boundary is
    a closed 6- or 8-link loop. On the 2x2 lattice no such chains exist
    (adjacent plaquettes share two edges) and only c1 is returned.
    """
    origin = (0,) * lat.d
    plane = (0, 1)
    contours = {"c1": contour_from_plaquettes(lat, [(plane, origin)])}

    if lat.L > 2:
        contours["c2"] = rectangle_contour(lat, 1, 2, plane, origin)
    elif lat.d == 3:  # bend into the (0,2) plane over the shared origin x-link
        contours["c2"] = contour_from_plaquettes(
            lat, [((0, 1), origin), ((0, 2), origin)]
        )

    if lat.L > 3:
        contours["c3"] = rectangle_contour(lat, 1, 3, plane, origin)
    elif lat.L > 2:  # L-shaped tromino in the plane
        contours["c3"] = contour_from_plaquettes(
            lat,
            [(plane, origin), (plane, _shift(origin, 0, 1)), (plane, _shift(origin, 1, 1))],
        )
    elif lat.d == 3:  # staircase over the z axis, one shared x-link per joint
        contours["c3"] = contour_from_plaquettes(
            lat,
            [((0, 1), origin), ((0, 2), origin), ((0, 1), _shift(origin, 2, 1))],
        )

    expected = {"c1": 4, "c2": 6, "c3": 8}
    for name, c in contours.items():
        if c.perimeter != expected[name] or len(c.link_set()) != expected[name]:
            raise AssertionError(f"{name} degenerated: {c}")
    return contours


def noncontractible_loop(lat: LatticeSpec, mu: int) -> LoopSpec:
    """Straight winding loop: the L direction-mu links at zero transverse coordinates."""
    if not 0 <= mu < lat.d:
        raise ValueError(f"invalid axis {mu}")
    links = []
    for x in range(lat.L):
        coords = [0] * lat.d
        coords[mu] = x
        links.append(link_index(lat, mu, coords))
    return LoopSpec(
        links=tuple(links),
        perimeter=lat.L,
        enclosed_area=0,
        contractible=False,
        direction=mu,
    )


def thooft_surface(lat: LatticeSpec, mu: int) -> DualSurface:
    """All direction-mu links with x_mu = 0: the L^(d-1) links pierced by the dual surface."""
    if not 0 <= mu < lat.d:
        raise ValueError(f"invalid axis {mu}")
    links = set()
    for coords in lat.sites():
        if coords[mu] == 0:
            links.add(link_index(lat, mu, coords))
    assert len(links) == lat.L ** (lat.d - 1)
    return DualSurface(links=frozenset(links), direction=mu)


def to_json_dict(lat: LatticeSpec) -> dict:
    """Export for external rendering: dimensions plus link and plaquette tables."""
    link_table = []
    for mu in range(lat.d):
        for coords in sorted(lat.sites(), key=lambda c: site_index(lat, c)):
            link_table.append(
                {"id": link_index(lat, mu, coords), "axis": mu, "site": list(coords)}
            )
    link_table.sort(key=lambda e: e["id"])
    plaq_table = [list(p) for p in all_plaquettes(lat)]
    return {
        "d": lat.d,
        "L": lat.L,
        "num_links": lat.num_links,
        "num_plaquettes": lat.num_plaquettes,
        "links": link_table,
        "plaquettes": plaq_table,
    }
