from pkg_resources import DistributionNotFound, get_distribution

try:
    __version__ = get_distribution("vtkit").version
except DistributionNotFound:
    # running from a source checkout
    __version__ = "unknown"
