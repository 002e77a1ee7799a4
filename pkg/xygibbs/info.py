import sys

import mpmath
import numpy
import scipy

from xygibbs import __version__

os = sys.platform
python = sys.version
xygibbs = __version__


def info() -> dict:
    """
    Returns information about the running platform and numerical stack.

    Every JSON report written by the command-line interface embeds this
    dictionary, so that a number in a report can always be traced back to the
    interpreter and library versions that produced it.

    Returns:
        dict: A dictionary containing the following keys:
            - 'OS': The name of the operating system platform.
            - 'Python': The version of Python currently running.
            - 'xygibbs': The version of this library.
            - 'numpy', 'scipy', 'mpmath': Versions of the numerical stack.
    """

    message = {
        'OS': os,
        'Python': python,
        'xygibbs': xygibbs,
        'numpy': numpy.__version__,
        'scipy': scipy.__version__,
        'mpmath': mpmath.__version__,
    }
    return message
