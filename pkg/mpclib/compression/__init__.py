from mpclib.compression.planner import *
from mpclib.compression.program import *
from mpclib.compression.marking import *
from mpclib.compression.balls import *
from mpclib.compression.engine import *
