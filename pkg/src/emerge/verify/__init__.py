"""Certification oracles for merging functions."""

from emerge.verify.anytime import AnytimeReport, StoppingRule, check_anytime
from emerge.verify.biatomic import BiAtomic, enumerate_biatomic, verify_ie_biatomic
from emerge.verify.envelope import (
    BudgetExceeded,
    EnvelopeResult,
    GridSpec,
    concave_majorant,
    se_envelope,
)
from emerge.verify.montecarlo import MCEstimate, Model, mc_e_property
