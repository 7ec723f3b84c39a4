import enum

__all__ = [
    "RESOLUTION",
    "EMBEDDING_DIM",
    "IMAGE_SIZE",
    "NUM_DECODER_CONVS",
    "BN_EPS",
    "BN_MOMENTUM",
    "BCE_EPS",
    "DEFAULT_THRESHOLD",
    "NUM_CODEBOOKS",
    "CODES_PER_BOOK",
    "UNIFORM_INIT_BOUND",
    "CBN_INIT_MEAN",
    "CBN_INIT_STD",
    "GENERATOR_VERSION",
    "Split",
    "Role",
]


RESOLUTION = 32
EMBEDDING_DIM = 128
IMAGE_SIZE = 128
NUM_DECODER_CONVS = 7

BN_EPS = 1e-5
BN_MOMENTUM = 0.1
BCE_EPS = 1e-7
DEFAULT_THRESHOLD = 0.5

NUM_CODEBOOKS = 5
CODES_PER_BOOK = 6
UNIFORM_INIT_BOUND = 0.4
CBN_INIT_MEAN = 1.0
CBN_INIT_STD = 0.2

GENERATOR_VERSION = "1"


class Split(str, enum.Enum):
    TRAIN = "train"
    TEST = "test"


class Role(str, enum.Enum):
    BASE = "base"
    NOVEL = "novel"
