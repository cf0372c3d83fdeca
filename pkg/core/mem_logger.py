"""
Structured logging for spatial-mem with per-chain progress tracking
Provides visibility into sweeps, acceptance rates and command flow
"""
import json
import logging
import time
from typing import Any, Dict, Optional

# Events that are only interesting when debugging a sampler
QUIET_EVENTS = {
    "sweep_completed", "mh_proposal", "step_size_adapted",
    "prediction_draw", "gig_rejection",
}


class MemLogger:
    """Structured logger with chain progress metrics"""

    def __init__(self, name: str = "spatial_mem"):
        self.start_time = time.monotonic()
        self.logger = logging.getLogger(name)

        # metrics tracking, one entry per running chain
        self.chain_metrics: Dict[int, Dict[str, Any]] = {}

    def _get_timestamp(self) -> float:
        """Get monotonic timestamp since start"""
        return time.monotonic() - self.start_time

    def log(self, event: str, data: Dict[str, Any], level: str = "INFO") -> Dict[str, Any]:
        """Log structured event with timestamp"""
        log_entry = {
            "timestamp": self._get_timestamp(),
            "level": level,
            "event": event,
            "data": data,
        }

        numeric_level = getattr(logging, level.upper(), logging.INFO)
        if event in QUIET_EVENTS:
            numeric_level = min(numeric_level, logging.DEBUG)

        if self.logger.isEnabledFor(numeric_level):
            ts_str = f"[{log_entry['timestamp']:.3f}s]"
            self.logger.log(numeric_level, f"{ts_str} {event} - {json.dumps(data, default=str)}")

        return log_entry

    def start_chain(self, chain_id: int, n_iter: int, seed: Optional[int] = None):
        """Start tracking a new chain"""
        self.chain_metrics[chain_id] = {
            "chain_id": chain_id,
            "start_time": self._get_timestamp(),
            "n_iter": n_iter,
            "iterations_done": 0,
            "seed": seed,
            "accepted": {},
            "proposed": {},
        }

        self.log("chain_started", {"chain_id": chain_id, "n_iter": n_iter, "seed": seed})

    def update_chain_metrics(self, chain_id: int, **kwargs):
        """Update metrics of a running chain"""
        if chain_id in self.chain_metrics:
            self.chain_metrics[chain_id].update(kwargs)

    def record_mh(self, chain_id: int, block: str, accepted: bool):
        """Count one Metropolis-Hastings proposal for a block"""
        metrics = self.chain_metrics.get(chain_id)
        if metrics is None:
            return
        metrics["proposed"][block] = metrics["proposed"].get(block, 0) + 1
        if accepted:
            metrics["accepted"][block] = metrics["accepted"].get(block, 0) + 1

    def log_progress(self, chain_id: int, iteration: int, every: int = 5000):
        """Emit a progress line every `every` iterations"""
        metrics = self.chain_metrics.get(chain_id)
        if metrics is None:
            return
        metrics["iterations_done"] = iteration
        if every > 0 and iteration % every == 0:
            self.log("chain_progress", {
                "chain_id": chain_id,
                "iteration": iteration,
                "of": metrics["n_iter"],
                "elapsed_s": round(self._get_timestamp() - metrics["start_time"], 2),
            })

    def complete_chain(self, chain_id: int) -> Dict[str, Any]:
        """Complete a chain and log its final metrics"""
        metrics = self.chain_metrics.pop(chain_id, None)
        if metrics is None:
            return {}

        end_time = self._get_timestamp()
        rates = {
            block: metrics["accepted"].get(block, 0) / count
            for block, count in metrics["proposed"].items() if count > 0
        }
        final_metrics = {
            "chain_id": chain_id,
            "seed": metrics["seed"],
            "iterations": metrics["iterations_done"],
            "duration_s": end_time - metrics["start_time"],
            "acceptance_rates": rates,
        }

        self.log("chain_completed", final_metrics)
        return final_metrics

    def log_command_event(self, event_type: str, **kwargs):
        """Log CLI command flow events"""
        self.log(f"command_{event_type}", kwargs)


# Global logger instance
logger = MemLogger()
