"""ergoscope: rotations, interval exchanges and limit laws of Birkhoff sums."""

# Initialize logging when package is imported
from .utils.logger import LoggerSetup

LoggerSetup.setup_logging()

__version__ = "0.1.0"
