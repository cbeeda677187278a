"""Single-writer enforcement for mutable scene objects.

An instance remembers the thread that created it. Mutating methods call
``_restrict_to_owner_thread`` first; a call from any other thread raises
ConcurrentMutationError. After a fork the child process adopts the calling
thread as the new owner, so process-based parallelism keeps working.
"""

from __future__ import annotations

import inspect
import os
import threading

from ..exceptions import ConcurrentMutationError

__all__ = ["SingleWriterMixin"]


class SingleWriterMixin:
    """Mixin that restricts mutation of an instance to its owner thread.

    Example:
        >>> class Scene(SingleWriterMixin):
        ...     def move(self):
        ...         self._restrict_to_owner_thread()
    """

    _owner_thread_native_id: int | None = None
    _owner_thread_name: str | None = None
    _owner_process_id: int | None = None

    def _claim_ownership(self) -> None:
        self._owner_thread_native_id = threading.get_native_id()
        self._owner_thread_name = threading.current_thread().name
        self._owner_process_id = os.getpid()

    def _restrict_to_owner_thread(self) -> None:
        """Validate that the current thread owns this instance.

        Raises:
            ConcurrentMutationError: If called from a different thread than
                the one that created the instance.
        """
        if (self._owner_thread_native_id is None
                or self._owner_process_id != os.getpid()):
            self._claim_ownership()
            return

        current = threading.get_native_id()
        if current != self._owner_thread_native_id:
            caller = inspect.stack()[1]
            raise ConcurrentMutationError(
                f"{type(self).__name__} is restricted to a single writer.\n"
                f"Owner thread : {self._owner_thread_native_id} "
                f"({self._owner_thread_name})\n"
                f"Current thread: {current} "
                f"({threading.current_thread().name}) at "
                f"{caller.filename}:{caller.lineno}\n"
                "Copy the program before mutating it from another thread.")

    def _release_ownership(self) -> None:
        """Forget the owner so the next mutating thread becomes the owner."""
        self._owner_thread_native_id = None
        self._owner_thread_name = None
        self._owner_process_id = None
