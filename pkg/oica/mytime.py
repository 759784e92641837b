"""Time utilities (:mod:`oica.mytime`)
====================================

Very simple functions for timing runs and formatting dates.

.. autofunction:: epoch2datestr

.. autofunction:: tic

.. autofunction:: toc

"""

import datetime
from time import time

from dateutil.tz import tzutc
from fluiddyn.util.terminal_colors import cprint


def epoch2datestr(epoch, tz=None):
    """Convert epoch into datestr.
    If no tz is given, the output is given in Coordinated Universal Time
    """
    if not tz:
        tz = tzutc()
    date = datetime.datetime.fromtimestamp(epoch, tz=tz)
    return date.isoformat()


tic_starts = []


def tic():
    """Simple timer start."""
    tic_starts.append(time())


def toc(comment=None, verbose=True):
    """Simpler timer stop. Returns the elapsed time since the last
    :func:`tic`, in seconds.

    :param comment: comment for print
    :type comment: str, optional
    :param verbose: print the elapsed time
    :type verbose: bool, optional
    """
    elapsed = time() - tic_starts.pop()
    if verbose:
        if comment is None:
            cprint.blue("Elapsed time {:.2f} seconds.".format(elapsed))
        else:
            cprint.blue("{:} {:.2f} seconds.".format(comment, elapsed))
    return elapsed
