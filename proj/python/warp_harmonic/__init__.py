"""Harmonic and alpha-harmonic maps from S^2 into warped products S^2 x I."""

from ._core import (  # noqa: F401
    Mesh,
    Map,
    Warp,
    accumulation_report,
    alpha_energy,
    build_icosphere,
    cli,
    compute_degree,
    energy,
    init_degree,
    ledger,
    make_spectrum_warp,
    make_tube_warp,
    minimize,
    parse_warp_spec,
    single_bubble_map,
    detect_concentration,
    version,
)
