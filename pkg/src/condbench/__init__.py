"""Online multi-step prediction benchmarks: trace conditioning and
patterning environments, fixed trace representations, recurrent learners
trained online (T-BPTT / RTRL), and a reproducible experiment harness."""

__version__ = "0.1.0"
