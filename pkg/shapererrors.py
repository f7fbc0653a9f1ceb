"""
Error classes for the traffic shaper

Error types intended to organize the different runtime errors into useful
categories where a specific handling action pertains to each type. The
command line maps each category onto an exit code through `error_code`.
"""

## built-in modules
import xml.etree.ElementTree as ET

# exit codes shared with shaper.py
EXIT_INPUT = 1
EXIT_INFEASIBLE = 2
EXIT_VALIDATION = 3


class ShaperError(Exception):
    """
    Base class for categorizing shaper exceptions
    """

    def __init__(self, message: str, source=None, error_code: int = EXIT_INPUT):
        """
        Constructor for ShaperError.

        Args:
            message: error message
            source: the object (config section, operating point, suite...)
                where the error occurred. None if not applicable.
            error_code: process exit code the command line should use
        """
        self._message = message
        super().__init__(self.message)
        self._source = source
        self._error_code = error_code

    @property
    def source(self):
        """
        Reference to the object where the error occurred
        """
        return self._source

    @property
    def message(self) -> str:
        """
        Return additional info about the error that occurred
        """
        return self._message

    @property
    def error_code(self) -> int:
        """
        Return the exit code corresponding to the error that occurred
        """
        return self._error_code


class ConfigError(ShaperError):
    """
    Exception type pertaining to errors in reading configuration

    Examples of configuration exceptions:
        - a required key such as qos.r_th_bps is missing
        - a value does not parse as a number
        - a value violates a type invariant (e.g. qos.eta outside (0, 1))
    """

    def __init__(self, source, key: str, message: str = None,
                 node: ET.Element = None, line: int = None):
        """
        Constructor for ConfigError.

        Args:
            source: the config section instance being loaded
            key: dotted configuration key, e.g. 'qos.eta'
            message: error message. if None (default), initialized internally
            node: config tree node being read when the error occurred
            line: line number in the source file, if known
        """
        self._key = key
        self._node = node
        self._line = line
        if message is None:
            text = None if node is None else node.text
            message = f"{source} encountered error at key '{key}' with text '{text}'"
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message, source, EXIT_INPUT)

    @property
    def key(self) -> str:
        """
        Dotted configuration key associated with the error
        """
        return self._key

    @property
    def node(self) -> ET.Element:
        """
        Config tree node associated with the error
        """
        return self._node

    @property
    def line(self) -> int:
        return self._line


class ProfileError(ConfigError):
    """
    Raised for malformed daily profiles (bad header, gaps, overlaps)
    """

    def __init__(self, message: str, line: int = None):
        super().__init__("DailyProfiles", "profiles", message=message, line=line)


class DomainError(ShaperError, ValueError):
    """
    Raised when an operation is called outside its precondition, e.g. a
    non-positive energy consumption rate or utilized > total bandwidth
    """

    def __init__(self, message: str, source=None):
        super().__init__(message, source, EXIT_INPUT)


class InfeasibleError(ShaperError):
    """
    Base type for configurations or operating points that cannot meet QoS

    When handling an error at the model level, e.g. in powermodel.py, use a
    subclass of this type so the command line reports exit code 2.
    """

    def __init__(self, message: str, source=None):
        super().__init__(message, source, EXIT_INFEASIBLE)


class ConfigurationInfeasibleError(InfeasibleError):
    """
    Raised when an edge spectral efficiency is non-finite or not positive
    """


class RateInfeasibleError(InfeasibleError):
    """
    Raised when an energy consumption rate cannot cover the SC static power

    Attributes:
        mu_e_per_s : offending energy consumption rate
        minimum_per_s : smallest feasible rate, P_0s / E
    """

    def __init__(self, mu_e_per_s: float, minimum_per_s: float):
        self.mu_e_per_s = mu_e_per_s
        self.minimum_per_s = minimum_per_s
        super().__init__(f"energy consumption rate {mu_e_per_s:g}/s is below the "
                         f"static-power floor {minimum_per_s:g}/s")


class MacroInfeasibleError(InfeasibleError):
    """
    Raised when the macro cell cannot meet the outage targets within W_m

    Attributes:
        required_hz : w_mm + w_msa + w_mso
        available_hz : W_m
    """

    def __init__(self, required_hz: float, available_hz: float, source=None):
        self.required_hz = required_hz
        self.available_hz = available_hz
        super().__init__(f"macro needs {required_hz / 1e6:.4g} MHz to meet QoS but "
                         f"only {available_hz / 1e6:.4g} MHz is available", source)


class ValidationFailure(ShaperError):
    """
    Raised when an analytic-vs-simulated check falls outside its tolerance

    Attributes:
        failures : the table rows that failed
    """

    def __init__(self, failures: list):
        self.failures = failures
        names = ", ".join(f"{row.suite}:{row.case}" for row in failures)
        super().__init__(f"{len(failures)} validation check(s) failed: {names}",
                         error_code=EXIT_VALIDATION)
