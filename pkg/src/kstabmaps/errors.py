"""Exception types shared across the package.

Every error carries a short machine-readable ``code`` so the CLI can put it
into a structured report.
"""


class KStabError(Exception):
    code = "error"


class InconsistentSamples(KStabError):
    code = "inconsistent_samples"


class DegreeOverflow(KStabError):
    code = "degree_overflow"


class TriangulationFailure(KStabError):
    code = "triangulation_failure"


class DimensionMismatch(KStabError):
    code = "dimension_mismatch"


class FunctionOutOfRange(KStabError):
    code = "function_out_of_range"


class NotSemiample(KStabError):
    code = "not_semiample"


class MissingInput(KStabError):
    code = "missing_input"


class MissingEntry(KStabError):
    code = "missing_entry"

    def __init__(self, monomial):
        self.monomial = tuple(monomial)
        super().__init__(f"no table entry for monomial {'.'.join(self.monomial)}")


class DegreeMismatch(KStabError):
    code = "degree_mismatch"


class LeadingTermNonzero(KStabError):
    code = "leading_term_nonzero"


class Inconclusive(KStabError):
    code = "inconclusive"


class NefCertificateUnavailable(KStabError):
    code = "nef_certificate_unavailable"


class NoThresholdBelowCap(KStabError):
    code = "no_threshold_below_cap"


class DivisionByZero(KStabError, ZeroDivisionError):
    code = "division_by_zero"


class NegativeDiscrepancy(UserWarning):
    """Warning: a log canonical pair produced a negative relative canonical term."""
