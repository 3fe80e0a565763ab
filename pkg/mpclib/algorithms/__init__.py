from mpclib.algorithms.common import *
from mpclib.algorithms.sparsify import *
from mpclib.algorithms.shatter import *
from mpclib.algorithms.luby import *
from mpclib.algorithms.finish import *
from mpclib.algorithms.schedules import *
from mpclib.algorithms.ruling_sets import *
