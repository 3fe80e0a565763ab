import pkg_resources

try:
    __version__ = pkg_resources.get_distribution("mpcsim").version
except pkg_resources.DistributionNotFound:
    # Running from a source checkout
    __version__ = "0.3.0"

from mpclib.constants import *
from mpclib.errors import *

from mpclib.randomness import *
from mpclib.separable import *

from mpclib.graph import *
from mpclib.congest import *
from mpclib.mpc import *
from mpclib.compression import *
from mpclib.algorithms import *
from mpclib.verify import *
