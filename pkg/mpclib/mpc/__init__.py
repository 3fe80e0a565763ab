from mpclib.mpc.machines import *
from mpclib.mpc.cluster import *
from mpclib.mpc.aggregation import *
