"""Frame-theoretic audio filterbanks: construction, frame bounds, tightening."""

from ._tightfb import (
    AuditorySpec,
    Filterbank,
    FrameBounds,
    TightnessEstimate,
    analyze,
    canonical_tight,
    compose_hybrid,
    enhance,
    frame_bounds_exact,
    frame_bounds_fft,
    ideal_ratio_mask,
    load,
    make_auditory,
    make_delta,
    make_random,
    make_stft,
    mcs,
    mcs_beta,
    reconstruct,
    save,
    si_sdr,
    synthesize,
    tighten,
    verify_hybrid_tightness,
    verify_random_tightness,
)

__all__ = [name for name in dir() if not name.startswith("_")]
