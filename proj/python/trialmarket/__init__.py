"""Trial-offer market simulator with social influence and position bias."""

from ._trialmarket import *  # noqa: F401,F403
from ._trialmarket import MarketError, __version__  # noqa: F401
