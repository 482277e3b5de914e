"""Shipped reference coefficient tables.

Each table is a plain-text system file (see ``spectral.load_system``)
holding externally tabulated quasi-harmonic coefficients.  They serve as
cross-checks through the scaling fit; their mode order and normalisation
follow the source tables, not this package's pair order.
"""

from importlib import resources

from .spectral import QuasiHarmonicSystem, load_system

REFERENCE_TABLES = {
    "p3_full": "p3_a001.txt",
    "p5_full": "p5_a001.txt",
    "p9_full": "p9_a001.txt",
    "p9_sub34": "p9_a001_sub34.txt",
    "p5_sub14": "p5_a001_sub14.txt",
    "p5_sub23": "p5_a001_sub23.txt",
}

# Tables that are full (p-1)-mode systems, keyed by (p, a); used when an
# analysis report wants the matching reference for a freshly built system.
FULL_TABLES = {
    (3, 0.01): "p3_full",
    (5, 0.01): "p5_full",
    (9, 0.01): "p9_full",
}


def load_reference(name: str) -> QuasiHarmonicSystem:
    """Load a shipped table by short name (see REFERENCE_TABLES)."""
    try:
        filename = REFERENCE_TABLES[name]
    except KeyError:
        raise KeyError(
            f"unknown reference table {name!r}; available: "
            f"{sorted(REFERENCE_TABLES)}") from None
    path = resources.files("fpualt.data").joinpath(filename)
    with resources.as_file(path) as p:
        return load_system(p, name=name)


def reference_for(p: int, a: float):
    """The shipped full-system table for (p, a), or None."""
    key = FULL_TABLES.get((p, a))
    return load_reference(key) if key else None
