"""Core types and geometry (:mod:`oica.core`)
=============================================

Shared by every other module:

- :mod:`oica.core.basis`: Gram matrix, pairwise angles, norm-ball
  projection, random rotations and the :class:`~oica.core.basis.CostKind`
  type;

- :mod:`oica.core.matrix_io`: CSV/JSON files, written atomically;

- :mod:`oica.core.errors`: exceptions.

All functions are pure and may be called concurrently.

"""

from oica.core.errors import *  # noqa: F401,F403
from oica.core.basis import *  # noqa: F401,F403
from oica.core.matrix_io import *  # noqa: F401,F403
