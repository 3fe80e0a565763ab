from mpclib.graph.graph import *
from mpclib.graph.generators import *
from mpclib.graph.graph_io import *
