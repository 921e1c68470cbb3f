"""Intensity-product superresolution from phase-controlled quantum erasers."""

__version__ = "0.1.0"

from .bench import (
    BenchConfig,
    BlockSpec,
    PortSpec,
    SourceSpec,
    four_block_config,
    michelson_output,
    phase_grid,
    port_amplitude,
    port_intensity,
    port_phase_table,
    total_detected_power,
)
from .correlation import (
    CorrelationReport,
    CorrelationRequest,
    canonical_layout,
    canonical_ports,
    closed_form,
    correlation_report,
    estimate_trace,
    pair_correlation,
    printed_eighth_order,
    product_correlation,
    sample_counts,
    verify_equivalence,
)
from .dsl import ConfigDocument, Diagnostic, parse, serialize, validate
from .exceptions import AnalysisError, ConfigError, DomainError, RequestError
from .fringes import FringeReport, Trace, analyze, count_fringes, first_peak, period_estimate, visibility
