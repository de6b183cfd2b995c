"""
Built-in surfaces and curves
============================

Catalog identifiers are strings such as ``"cylinder(1)"`` or
``"helix(1, 1)"``.  Supported combinations:

============================  ==========================================
surface                       curves
============================  ==========================================
``plane``                     ``circle(r)``
``cylinder(a)``               ``helix(a, b)``
``sphere(R)``                 ``circle(r)`` (latitude circle, great if r == R)
``helicoid(c)``               ``helix(a, c)`` (asymptotic line)
``ellipsoid(a, b, c)``        ``wave(amp, freq)``
============================  ==========================================

Cylinder, sphere and ellipsoid carry outward normals, the plane uses +z and
the helicoid uses ``S_u x S_v``.
"""

from __future__ import annotations

import re

import numpy as np

from .errors import DomainError
from .frames import CurveOnSurface, SurfacePatch
from .geom import CurveDef

_ID = re.compile(r"^\s*([A-Za-z_][A-Za-z_0-9]*)\s*(?:\((.*)\))?\s*$")


def parse_id(text: str):
    """Split ``"name(a, b)"`` into ``("name", (a, b))``."""
    m = _ID.match(text)
    if not m:
        raise ValueError(f"malformed catalog id {text!r}")
    name, args = m.group(1).lower(), m.group(2)
    if args is None or not args.strip():
        return name, ()
    try:
        return name, tuple(float(a) for a in args.split(","))
    except ValueError:
        raise ValueError(f"non-numeric argument in {text!r}") from None


def _stack(*c):
    return np.stack(np.broadcast_arrays(*c), axis=-1)


def plane() -> SurfacePatch:
    return SurfacePatch(
        lambda u, v: _stack(u, v, 0.0 * u),
        partials=lambda u, v: (_stack(1.0 + 0 * u, 0 * u, 0 * u), _stack(0 * u, 1.0 + 0 * u, 0 * u)),
        normal_fn=lambda u, v: _stack(0 * u, 0 * u, 1.0 + 0 * u),
        orientation_label="+z",
        name="plane",
    )


def cylinder(a: float) -> SurfacePatch:
    if a <= 0:
        raise DomainError("cylinder radius must be positive")
    return SurfacePatch(
        lambda u, v: _stack(a * np.cos(u), a * np.sin(u), v + 0 * u),
        partials=lambda u, v: (_stack(-a * np.sin(u), a * np.cos(u), 0 * u), _stack(0 * u, 0 * u, 1.0 + 0 * u + 0 * v)),
        normal_fn=lambda u, v: _stack(np.cos(u), np.sin(u), 0 * u + 0 * v),
        orientation_label="outward",
        name=f"cylinder({a:g})",
    )


def sphere(r: float) -> SurfacePatch:
    if r <= 0:
        raise DomainError("sphere radius must be positive")

    def S(u, v):
        return r * _stack(np.cos(v) * np.cos(u), np.cos(v) * np.sin(u), np.sin(v))

    return SurfacePatch(
        S,
        v_range=(-np.pi / 2, np.pi / 2),
        partials=lambda u, v: (
            r * np.cos(v)[..., None] * _stack(-np.sin(u), np.cos(u), 0 * u),
            r * _stack(-np.sin(v) * np.cos(u), -np.sin(v) * np.sin(u), np.cos(v)),
        ),
        normal_fn=lambda u, v: S(u, v) / r,
        orientation_label="outward",
        name=f"sphere({r:g})",
    )


def helicoid(c: float) -> SurfacePatch:
    if c == 0:
        raise DomainError("helicoid pitch must be nonzero")
    return SurfacePatch(
        lambda u, v: _stack(v * np.cos(u), v * np.sin(u), c * u),
        partials=lambda u, v: (_stack(-v * np.sin(u), v * np.cos(u), c + 0 * u), _stack(np.cos(u), np.sin(u), 0 * u + 0 * v)),
        orientation_label="Su x Sv",
        name=f"helicoid({c:g})",
    )


def ellipsoid(a: float, b: float, c: float) -> SurfacePatch:
    if min(a, b, c) <= 0:
        raise DomainError("ellipsoid semi-axes must be positive")

    def S(u, v):
        return _stack(a * np.cos(v) * np.cos(u), b * np.cos(v) * np.sin(u), c * np.sin(v))

    def normal(u, v):
        p = S(u, v)
        return p / np.array([a * a, b * b, c * c])

    return SurfacePatch(
        S,
        v_range=(-np.pi / 2, np.pi / 2),
        normal_fn=normal,
        orientation_label="outward",
        name=f"ellipsoid({a:g},{b:g},{c:g})",
    )


SURFACES = {"plane": plane, "cylinder": cylinder, "sphere": sphere, "helicoid": helicoid, "ellipsoid": ellipsoid}


def surface_from_id(text: str) -> SurfacePatch:
    name, args = parse_id(text)
    if name not in SURFACES:
        raise ValueError(f"unknown surface {name!r}; known: {', '.join(SURFACES)}")
    try:
        return SURFACES[name](*args)
    except TypeError:
        raise ValueError(f"wrong number of parameters for surface {name!r}") from None


def _helix_curve(a, b, t0, t1, name):
    return CurveDef(
        lambda t: _stack(a * np.cos(t), a * np.sin(t), b * t),
        t0,
        t1,
        derivatives=(
            lambda t: _stack(-a * np.sin(t), a * np.cos(t), b + 0 * t),
            lambda t: _stack(-a * np.cos(t), -a * np.sin(t), 0 * t),
            lambda t: _stack(a * np.sin(t), -a * np.cos(t), 0 * t),
        ),
        name=name,
    )


def _circle_curve(r, z0, t0, t1, name):
    return CurveDef(
        lambda t: _stack(r * np.cos(t), r * np.sin(t), z0 + 0 * t),
        t0,
        t1,
        derivatives=(
            lambda t: _stack(-r * np.sin(t), r * np.cos(t), 0 * t),
            lambda t: _stack(-r * np.cos(t), -r * np.sin(t), 0 * t),
            lambda t: _stack(r * np.sin(t), -r * np.cos(t), 0 * t),
        ),
        name=name,
    )


def curve_on_surface(surface_id: str, curve_id: str, t_min: float = 0.0, t_max: float = 2 * np.pi) -> CurveOnSurface:
    """Build one of the catalog curve/surface fixtures over ``[t_min, t_max]``."""
    sname, sargs = parse_id(surface_id)
    cname, cargs = parse_id(curve_id)
    surf = surface_from_id(surface_id)
    label = f"{curve_id.strip()} on {surface_id.strip()}"

    def need(n):
        if len(cargs) != n:
            raise ValueError(f"curve {cname!r} takes {n} parameter(s)")

    if cname == "helix":
        need(2)
        a, b = cargs
        if sname == "cylinder":
            if not np.isclose(a, sargs[0]):
                raise ValueError("helix radius must equal the cylinder radius")
            return CurveOnSurface(
                surf, lambda t: (t, b * t), t_min, t_max,
                path_derivative=lambda t: (1.0 + 0 * t, b + 0 * t),
                space_curve=_helix_curve(a, b, t_min, t_max, label), name=label,
            )
        if sname == "helicoid":
            if not np.isclose(b, sargs[0]):
                raise ValueError("helix pitch must equal the helicoid pitch")
            return CurveOnSurface(
                surf, lambda t: (t, a + 0 * t), t_min, t_max,
                path_derivative=lambda t: (1.0 + 0 * t, 0 * t),
                space_curve=_helix_curve(a, b, t_min, t_max, label), name=label,
            )
    elif cname == "circle":
        need(1)
        (r,) = cargs
        if r <= 0:
            raise DomainError("circle radius must be positive")
        if sname == "plane":
            return CurveOnSurface(
                surf, lambda t: (r * np.cos(t), r * np.sin(t)), t_min, t_max,
                path_derivative=lambda t: (-r * np.sin(t), r * np.cos(t)),
                space_curve=_circle_curve(r, 0.0, t_min, t_max, label), name=label,
            )
        if sname == "sphere":
            R = sargs[0]
            if r > R * (1 + 1e-12):
                raise ValueError("circle radius exceeds the sphere radius")
            v0 = float(np.arccos(min(1.0, r / R)))
            return CurveOnSurface(
                surf, lambda t: (t, v0 + 0 * t), t_min, t_max,
                path_derivative=lambda t: (1.0 + 0 * t, 0 * t),
                space_curve=_circle_curve(r, R * np.sin(v0), t_min, t_max, label), name=label,
            )
    elif cname == "wave":
        need(2)
        amp, freq = cargs
        if sname == "ellipsoid":
            # numerical derivatives need room around the sampled range
            pad = 0.5
            path = lambda t: (t, amp * np.sin(freq * t))
            curve = CurveDef(lambda t: surf(*path(t)), t_min - pad, t_max + pad, name=label)
            return CurveOnSurface(
                surf, path, t_min, t_max,
                path_derivative=lambda t: (1.0 + 0 * t, amp * freq * np.cos(freq * t)),
                space_curve=curve, name=label,
            )
    raise ValueError(f"curve {cname!r} is not available on surface {sname!r}")
