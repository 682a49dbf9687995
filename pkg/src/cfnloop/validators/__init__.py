from .format import check_format
from .resource_spec import ResourceSpec, load_resource_spec
from .syntax import check_syntax

__all__ = ["check_format", "check_syntax", "ResourceSpec", "load_resource_spec"]
