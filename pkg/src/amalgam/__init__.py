"""Finite structures with two binary relations: amalgams, searches and saturation."""

from .auxrel import OperatorMode, auxiliary_from_operator, is_auxiliary, is_causal_space
from .construct import (AmalgamMode, Case, CaseTag, admissible_case, amalgamate, amalgamate_leq,
                        expand_superamalgam, free_amalgamate, lift, linearize_pipeline, szpilrajn, verify)
from .core import (AUXILIARY, CAUSAL, COARSER_ORDER, LEQ, LL, OK, POSETS, U, UNION_OF_CHAINS, URQUHART,
                   Amalgam, BinRel, MaxAntichain, Prop, Report, Structure, Theory, VFormation, Violation,
                   are_isomorphic, canonical_form, canonize, check_rel_props, compose, is_embedding,
                   normalize_instance, transitive_closure, validate)
from .errors import *  # noqa: F401,F403
from .fixtures import fixture, run_all, run_fixture
from .fraisse import check_ap_at_size, enumerate_models, extensions, saturate
from .oracle import (EXHAUSTED, WITNESS, SearchConfig, SearchResult, check_complete,
                     decide_superamalgamation_over_union, iter_witnesses, search)

__version__ = "0.1.0"
