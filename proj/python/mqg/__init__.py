"""Band spectra of the magnetic square-lattice quantum graph."""

from ._core import (
    Error,
    IoError,
    NoNarrowBandsError,
    NonCollapseError,
    SingularRingError,
    ValidationError,
    band_function,
    coprime_ratios,
    narrow_band_widths,
    probability_sigma,
    run_cli,
    scan_bands,
    star_graph_negative_eigenvalues,
    thouless_reference,
    validate_flux,
)

__all__ = [
    "Error",
    "IoError",
    "NoNarrowBandsError",
    "NonCollapseError",
    "SingularRingError",
    "ValidationError",
    "band_function",
    "coprime_ratios",
    "narrow_band_widths",
    "probability_sigma",
    "run_cli",
    "scan_bands",
    "star_graph_negative_eigenvalues",
    "thouless_reference",
    "validate_flux",
]
