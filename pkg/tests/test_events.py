"""
Tests for the event system.
"""

import asyncio
import logging

import pytest
from unittest.mock import Mock

from strtrend.events import PipelineEventEmitter


@pytest.fixture
def event_emitter():
    """Create an event emitter for testing."""
    return PipelineEventEmitter()


def test_event_emitter_creation(event_emitter):
    """Test event emitter creation."""
    assert event_emitter._listeners == {}


def test_event_emitter_on(event_emitter):
    """Test registering event listeners."""
    callback = Mock()
    event_emitter.on('epoch_end', callback)

    assert event_emitter.listener_count('epoch_end') == 1
    assert callback in event_emitter._listeners['epoch_end']


def test_event_emitter_off(event_emitter):
    """Test removing event listeners."""
    callback = Mock()
    event_emitter.on('cache_hit', callback)
    event_emitter.off('cache_hit', callback)

    assert event_emitter.listener_count('cache_hit') == 0


def test_event_emitter_off_nonexistent(event_emitter):
    """Test removing non-existent event listener."""
    event_emitter.off('cache_hit', Mock())


def test_event_emitter_emit(event_emitter):
    """Test emitting events with positional and keyword payloads."""
    callback = Mock()
    event_emitter.on('checkpoint', callback)

    event_emitter.emit('checkpoint', 12, 0.25, variant='LSTM Ours')

    callback.assert_called_once_with(12, 0.25, variant='LSTM Ours')


def test_event_emitter_emit_multiple_listeners(event_emitter):
    """Test emitting events to multiple listeners."""
    callback1 = Mock()
    callback2 = Mock()
    event_emitter.on('cell_done', callback1)
    event_emitter.on('cell_done', callback2)

    event_emitter.emit('cell_done', 'modalities')

    callback1.assert_called_once_with('modalities')
    callback2.assert_called_once_with('modalities')


def test_event_emitter_emit_nonexistent_event(event_emitter):
    """Test emitting an event nobody listens to."""
    event_emitter.emit('early_stop', 40, 20)


@pytest.mark.asyncio
async def test_event_emitter_emit_async_callback(event_emitter):
    """Coroutine listeners are scheduled on the running loop."""
    seen = []

    async def async_callback(key):
        seen.append(key)

    event_emitter.on('cache_miss', async_callback)
    event_emitter.emit('cache_miss', 'abc')
    await asyncio.sleep(0.01)

    assert seen == ['abc']


def test_event_emitter_emit_callback_exception(event_emitter, caplog):
    """A failing listener is logged and the remaining listeners still run."""
    def error_callback(arg):
        raise ValueError("Test error")

    after = Mock()
    event_emitter.on('embed_error', error_callback)
    event_emitter.on('embed_error', after)

    with caplog.at_level(logging.ERROR, logger="strtrend.events"):
        event_emitter.emit('embed_error', 'key')

    assert "listener for embed_error failed" in caplog.text
    after.assert_called_once_with('key')


def test_event_emitter_remove_all_listeners_specific_event(event_emitter):
    """Test removing all listeners for a specific event."""
    event_emitter.on('epoch_end', Mock())
    event_emitter.on('epoch_end', Mock())
    event_emitter.on('checkpoint', Mock())

    event_emitter.remove_all_listeners('epoch_end')

    assert 'epoch_end' not in event_emitter._listeners
    assert 'checkpoint' in event_emitter._listeners


def test_event_emitter_remove_all_listeners_all_events(event_emitter):
    """Test removing all listeners for all events."""
    event_emitter.on('epoch_end', Mock())
    event_emitter.on('checkpoint', Mock())

    event_emitter.remove_all_listeners()

    assert event_emitter._listeners == {}
