from .bundles import Bundle, BundleError, load_bundle
from .figures import plot_aggregate, plot_route, plot_timeline

__all__ = ["Bundle", "BundleError", "load_bundle",
           "plot_route", "plot_timeline", "plot_aggregate"]
