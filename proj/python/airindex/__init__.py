from ._airindex import *  # noqa: F401,F403
