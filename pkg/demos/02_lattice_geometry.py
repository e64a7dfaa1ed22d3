# Periodic lattice geometry: links, plaquettes, stars, loops, dual surfaces.
#
# One qubit lives on each link of a d-dimensional torus of linear size L.
# Links are numbered direction-major: link = mu * L^d + (x1 + L x2 + ...).

from z2sim import lattice as lt

for d, L in ((2, 3), (3, 2)):
    lat = lt.build(d, L)
    print(f"d={d} L={L}: {lat.num_links} links, {lat.num_plaquettes} plaquettes")

lat = lt.build(2, 3)
print("plaquette at the origin:", lt.plaquette_links(lat, (0, 1), (0, 0)))
print("star at the origin:     ", lt.star_links(lat, (0, 0)))

# Wilson contours c1, c2, c3 have perimeters 4:6:8 and areas 1:2:3
for name, c in lt.wilson_contours(lat).items():
    print(f"{name}: perimeter {c.perimeter}, area {c.enclosed_area}, links {sorted(c.link_set())}")

# Winding loops and the dual surfaces that measure topological sectors.
# A loop crosses its own axis' surface an odd number of times, any other
# surface an even number: that parity is the anticommutation behind the
# sector labels.
for mu in range(2):
    loop = lt.noncontractible_loop(lat, mu)
    for nu in range(2):
        surf = lt.thooft_surface(lat, nu)
        shared = len(surf.links & loop.link_set())
        print(f"loop axis {mu} vs surface axis {nu}: {shared} shared links")
