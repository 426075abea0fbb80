from . import dataset
from . import results
from . import settings
from . import store
