"""
System Information Utilities

Host facts used to size the worker pool and to describe the machine in the
log. Nothing gathered here is written into result files.
"""

import logging
import platform
from typing import Any, Dict

import numpy as np
import psutil

logger = logging.getLogger(__name__)


def physical_core_count() -> int:
    """
    Number of physical CPU cores.

    Returns:
        int: Physical cores, falling back to logical cores and then to 1
    """
    try:
        count = psutil.cpu_count(logical=False) or psutil.cpu_count(logical=True)
    except Exception as e:
        logger.debug("Could not query CPU count: %s", str(e))
        count = None
    return int(count) if count else 1


def get_cpu_frequency() -> float:
    """
    Get current CPU frequency in MHz.

    Returns:
        float: CPU frequency in MHz, 0.0 if unavailable
    """
    try:
        cpu_freq = psutil.cpu_freq()
        if cpu_freq and cpu_freq.current:
            return float(cpu_freq.current)
    except Exception as e:
        logger.debug("Could not query CPU frequency: %s", str(e))
    return 0.0


def describe_host() -> Dict[str, Any]:
    """
    Summary of the host running an experiment.

    Returns:
        Dict[str, Any]: Platform, Python/numpy versions, CPU and memory figures
    """
    try:
        mem = psutil.virtual_memory()
        return {
            "platform": f"{platform.system()} {platform.release()} ({platform.machine()})",
            "python": platform.python_version(),
            "numpy": np.__version__,
            "physical_cores": physical_core_count(),
            "logical_cores": psutil.cpu_count(logical=True),
            "frequency_mhz": get_cpu_frequency(),
            "memory_total_mb": mem.total // (1024 * 1024),
            "memory_available_mb": mem.available // (1024 * 1024),
        }
    except Exception as e:
        logger.error("Error getting system info: %s", str(e), exc_info=True)
        return {"platform": platform.system(), "error": str(e)}


def log_host_description():
    """Log ``describe_host`` at INFO level."""
    info = describe_host()
    logger.info(
        "Host: %s, Python %s, numpy %s, %s physical / %s logical cores, %s MB memory available",
        info.get("platform"),
        info.get("python"),
        info.get("numpy"),
        info.get("physical_cores"),
        info.get("logical_cores"),
        info.get("memory_available_mb"),
    )
