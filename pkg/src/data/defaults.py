"""Default hyperparameters, physics constants and dataset locations.

Every experiment-file key falls back to a value from this module.
"""

import math

TASKS = ["cartpole", "mnist", "synthetic"]
MODES = ["Baseline", "SN", "PER", "PER_SN", "SN_Sampling"]
SUPERVISED_MODES = ["Baseline", "SN", "PER", "PER_SN"]
SCREENER_MODES = ["SN", "PER_SN", "SN_Sampling"]
PRIORITIZED_MODES = ["PER", "PER_SN", "SN_Sampling"]

# Screener objective
MARGIN_M = 1.0
L1_ALPHA = 1e-4
BLEND_LAMBDA = 0.0
ERROR_CAP = 5.0

# Optimization (Adam)
LEARNING_RATE = 1e-3
ADAM_BETAS = (0.9, 0.999)
ADAM_EPS = 1e-8
RL_MAX_GRAD_NORM = 10.0
HUBER_DELTA = 1.0

# Replay
BATCH_SIZE = 32
BUFFER_CAPACITY = 50_000
PER_ALPHA = 0.6
SN_SAMPLING_ALPHA = 1.0
PER_EPSILON = 0.01
BETA_START = 0.4
BETA_END = 1.0
BETA_ANNEAL_STEPS = 40_000

# Deep Q-learning
GAMMA = 0.99
EXPLORE_START = 1.0
EXPLORE_END = 0.05
EXPLORE_DECAY_STEPS = 5_000
TARGET_SYNC_INTERVAL = 500
WARMUP_STEPS = 1_000
TOTAL_STEPS = 60_000
EVAL_INTERVAL = 5_000
EVAL_EPISODES = 20

# Cart-pole physics (Cart-pole-v0 values)
CARTPOLE = {
    "gravity": 9.8,
    "mass_cart": 1.0,
    "mass_pole": 0.1,
    "half_length": 0.5,
    "force_mag": 10.0,
    "tau": 0.02,
    "x_threshold": 2.4,
    "theta_threshold": 12 * 2 * math.pi / 360,
    "max_episode_steps": 200,
    "reset_bound": 0.05,
}

# Supervised
EPOCHS = 5
SYNTHETIC_N = 2_000
SYNTHETIC_OVERLAP = 0.2
SYNTHETIC_BAND = 0.5
TRAIN_SUBSET = 0
TRACK_SAMPLES = 16
EXTREME_K = 8
MNIST_CLASSES = 10

# Hidden widths; input/output widths come from the data.
ARCHITECTURES = {
    "mnist": {"main": [256, 128], "screener": [128]},
    "synthetic": {"main": [32], "screener": [16]},
    "cartpole": {"main": [64, 64], "screener": [64]},
}

# Headline metric per task, used by compare
PRIMARY_METRIC = {
    "cartpole": "eval_mean_reward",
    "mnist": "test_accuracy",
    "synthetic": "test_accuracy",
}

# MNIST files
DATA_DIR_ENV = "SCREENER_DATA_DIR"
DEFAULT_DATA_DIR = "data/mnist"
MNIST_FILES = {
    "train_images": "train-images-idx3-ubyte",
    "train_labels": "train-labels-idx1-ubyte",
    "test_images": "t10k-images-idx3-ubyte",
    "test_labels": "t10k-labels-idx1-ubyte",
}
MNIST_MIRROR_ENV = "MNIST_MIRROR_URL"
DEFAULT_MNIST_MIRROR = "https://storage.googleapis.com/cvdf-datasets/mnist/"

# Run bookkeeping
RUNS_DB_ENV = "SCREENER_RUNS_DB"
DEFAULT_RUNS_DB = "data/runs.db"
LOG_DIR_ENV = "SCREENER_LOG_DIR"
DEFAULT_LOG_DIR = "logs"
DONE_SENTINEL = "DONE"
