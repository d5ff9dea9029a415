# config.py
import os
from dotenv import load_dotenv

load_dotenv()

# Determinism switch (keep "1" for every reported run)
LAB_DETERMINISTIC = os.getenv("LAB_DETERMINISTIC", "1") == "1"

# Worker cap for torch intra-op threads and per-trial thread pools
LAB_THREADS = int(os.getenv("LAB_THREADS", 1))

# Logging
LAB_LOG_LEVEL = os.getenv("LAB_LOG_LEVEL", "INFO").upper()

# Default artifact root when neither --out nor the config file names one
LAB_OUTPUT_DIR = os.getenv("LAB_OUTPUT_DIR", "runs")
