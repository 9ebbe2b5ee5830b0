"""Coverage analysis of UAV-mounted IRS assisted NOMA downlinks in Poisson cellular networks."""
from .config.config_manager import ConfigManager

__all__ = ["ConfigManager"]
