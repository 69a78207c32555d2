# Trial queue for parallel experiment runs
import heapq
import threading
from datetime import datetime
from typing import Dict, List, Optional
from dataclasses import dataclass
from enum import Enum
import logging

logger = logging.getLogger(__name__)


class TrialStatus(Enum):
    """Trial processing status"""
    PENDING = "pending"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"


@dataclass
class TrialTask:
    """One seeded tester run"""
    trial: int
    rng_label: str
    created_at: datetime
    status: TrialStatus = TrialStatus.PENDING
    started_at: Optional[datetime] = None
    completed_at: Optional[datetime] = None
    result: Optional[object] = None
    error_message: Optional[str] = None

    def __lt__(self, other):
        """Lower trial numbers are handed out first"""
        return self.trial < other.trial


class TrialQueue:
    """Thread-safe queue of trials; results are read back in trial order"""

    def __init__(self):
        self._queue: List[TrialTask] = []
        self._lock = threading.Lock()
        self._running: Dict[int, TrialTask] = {}
        self._finished: Dict[int, TrialTask] = {}

        # Statistics
        self._stats = {
            'total_completed': 0,
            'total_failed': 0,
            'avg_trial_seconds': 0.0,
        }

    def add_trial(self, trial: int, rng_label: Optional[str] = None) -> None:
        """Add a trial to the queue"""
        task = TrialTask(trial=trial, rng_label=rng_label or f"trial-{trial}", created_at=datetime.now())
        with self._lock:
            if trial in self._running or trial in self._finished or any(t.trial == trial for t in self._queue):
                raise ValueError(f"Trial {trial} is already queued")
            heapq.heappush(self._queue, task)
        logger.debug(f"Queued trial {trial}")

    def get_next_trial(self) -> Optional[TrialTask]:
        """Next pending trial, or None when the queue is drained"""
        with self._lock:
            if not self._queue:
                return None
            task = heapq.heappop(self._queue)
            task.status = TrialStatus.RUNNING
            task.started_at = datetime.now()
            self._running[task.trial] = task
            return task

    def mark_completed(self, trial: int, result: Optional[object] = None, success: bool = True,
                       error_message: Optional[str] = None) -> bool:
        """Record the outcome of a running trial"""
        with self._lock:
            task = self._running.pop(trial, None)
            if task is None:
                logger.warning(f"Trial {trial} not found among running trials")
                return False

            task.completed_at = datetime.now()
            task.result = result
            if success:
                task.status = TrialStatus.COMPLETED
                self._stats['total_completed'] += 1
                self._update_avg_trial_seconds((task.completed_at - task.started_at).total_seconds())
            else:
                task.status = TrialStatus.FAILED
                task.error_message = error_message
                self._stats['total_failed'] += 1
                logger.error(f"Trial {trial} failed: {error_message}")
            self._finished[trial] = task
            return True

    def get_queue_status(self) -> Dict:
        """Current queue status and statistics"""
        with self._lock:
            return {
                'queue_size': len(self._queue),
                'running_count': len(self._running),
                'finished_count': len(self._finished),
                'statistics': self._stats.copy(),
            }

    def finished_in_order(self) -> List[TrialTask]:
        """Finished trials sorted by trial number"""
        with self._lock:
            return [self._finished[t] for t in sorted(self._finished)]

    def _update_avg_trial_seconds(self, new_time: float):
        """Running average over completed trials"""
        completed = self._stats['total_completed']
        current_avg = self._stats['avg_trial_seconds']
        self._stats['avg_trial_seconds'] = (current_avg * (completed - 1) + new_time) / completed
