from loguru import logger

# library code stays silent until an application (e.g. the CLI) enables it
logger.disable("slcp")

__all__ = ["logger"]
