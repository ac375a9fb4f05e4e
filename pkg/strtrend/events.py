"""
Event system for pipeline progress notifications.

Known events: cache_hit, cache_miss, embed_error, epoch_end, checkpoint,
early_stop, cell_done.
"""

import asyncio
import logging
from typing import Callable, Dict, List, Optional


logger = logging.getLogger(__name__)


class PipelineEventEmitter:
    """Event emitter for pipeline events."""

    def __init__(self):
        self._listeners: Dict[str, List[Callable]] = {}

    def on(self, event: str, callback: Callable) -> None:
        """Register an event listener."""
        self._listeners.setdefault(event, []).append(callback)

    def off(self, event: str, callback: Callable) -> None:
        """Remove an event listener."""
        if event in self._listeners:
            try:
                self._listeners[event].remove(callback)
            except ValueError:
                pass

    def emit(self, event: str, *args, **kwargs) -> None:
        """Emit an event to all listeners; a failing listener never stops the pipeline."""
        for callback in list(self._listeners.get(event, ())):
            try:
                if asyncio.iscoroutinefunction(callback):
                    asyncio.get_running_loop().create_task(callback(*args, **kwargs))
                else:
                    callback(*args, **kwargs)
            except Exception:
                logger.exception("listener for %s failed", event)

    def listener_count(self, event: str) -> int:
        return len(self._listeners.get(event, ()))

    def remove_all_listeners(self, event: Optional[str] = None) -> None:
        """Remove all listeners for an event or all events."""
        if event:
            self._listeners.pop(event, None)
        else:
            self._listeners.clear()
