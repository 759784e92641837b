"""Tolerance reports (:mod:`oica.util.report`)
============================================

Subcommands declare their acceptance checks in a :class:`ToleranceReport`.
The process exit status is 0 if and only if every check passed; failed
checks are listed on standard error.

.. autoclass:: Check

.. autoclass:: ToleranceReport
   :members:

"""

import sys
from collections import namedtuple

import numpy as np
from fluiddyn.util.terminal_colors import cprint

__all__ = ["Check", "ToleranceReport"]

Check = namedtuple("Check", ["name", "value", "bound", "relation", "passed"])

_RELATIONS = {
    "<": np.less,
    "<=": np.less_equal,
    ">": np.greater,
    ">=": np.greater_equal,
}


class ToleranceReport:
    """Named checks of ``value <relation> bound``.

    :param title: name of the report (the subcommand)
    :type title: str
    """

    def __init__(self, title):
        self.title = title
        self.checks = []

    def check(self, name, value, bound, relation="<"):
        """Records a check and returns whether it passed. NaN values fail."""
        try:
            compare = _RELATIONS[relation]
        except KeyError:
            raise ValueError("Unknown relation " + relation) from None
        value = float(value)
        passed = bool(np.isfinite(value) and compare(value, bound))
        self.checks.append(Check(name, value, float(bound), relation, passed))
        return passed

    def require(self, name, condition):
        """Records a boolean check."""
        passed = bool(condition)
        self.checks.append(Check(name, float(passed), 1.0, ">=", passed))
        return passed

    @property
    def violations(self):
        return [c for c in self.checks if not c.passed]

    @property
    def passed(self):
        return not self.violations

    @property
    def exit_status(self):
        return 0 if self.passed else 1

    def summary(self):
        """JSON-friendly dictionary of the checks."""
        return {
            "passed": self.passed,
            "checks": [
                {
                    "name": c.name,
                    "value": c.value,
                    "bound": c.bound,
                    "relation": c.relation,
                    "passed": c.passed,
                }
                for c in self.checks
            ],
        }

    def print_report(self, stdout=None, stderr=None):
        """Prints each violation on standard error and a summary line on
        standard output. Returns the exit status."""
        stderr = stderr if stderr is not None else sys.stderr
        stdout = stdout if stdout is not None else sys.stdout
        for c in self.violations:
            print(
                "{:}: check failed: {:} = {:.6g}, expected {:} {:.6g}".format(
                    self.title, c.name, c.value, c.relation, c.bound
                ),
                file=stderr,
            )
        line = "{:}: {:d}/{:d} checks passed".format(
            self.title, len(self.checks) - len(self.violations), len(self.checks)
        )
        if stdout is sys.stdout:
            if self.passed:
                cprint.blue(line)
            else:
                cprint.red(line)
        else:
            print(line, file=stdout)
        return self.exit_status
