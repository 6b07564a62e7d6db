"""Deep Variational Q-Network: agents, environments, and option discovery."""

from ._dvqn import *  # noqa: F401,F403
from ._dvqn import __version__  # noqa: F401
