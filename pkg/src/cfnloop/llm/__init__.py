from .messages import ChatMessage, Conversation, GenerationSettings, Usage
from .prompts import PromptConfig, build_system_prompt
from .providers import HttpChatProvider, ScriptedProvider, generate, load_script_library

__all__ = [
    "ChatMessage",
    "Conversation",
    "GenerationSettings",
    "HttpChatProvider",
    "PromptConfig",
    "ScriptedProvider",
    "Usage",
    "build_system_prompt",
    "generate",
    "load_script_library",
]
