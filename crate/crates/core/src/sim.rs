//! Availability-driven list scheduling, shared by the alpha-point scheduler
//! and the fixed-order scheduler.
//!
//! Whenever a processor is idle at time `t`, it starts the highest-priority
//! task that is available: its availability time has passed, and (for Reduce
//! tasks) every positive-volume Map task of the same job has completed. If the
//! highest-priority task is unavailable, a lower-priority one may run. If
//! nothing is available, the processor idles until the next event.
//!
//! Zero-volume tasks occupy no processor time: Maps complete at the job's
//! release date, Reduces the moment their job's Map tasks are done.

use std::collections::BTreeMap;

use crate::model::{Instance, Schedule, ScheduleEntry, TaskKind, TaskRef};

/// A positive-volume task as the simulator sees it. Smaller `priority`
/// compares as more urgent.
#[derive(Debug, Clone)]
pub(crate) struct SimTask {
    pub task: TaskRef,
    pub processor: usize,
    pub duration: f64,
    pub available_from: f64,
    pub priority: (u64, u64),
    pub is_reduce: bool,
}

/// Runs the event loop and returns the complete schedule, zero-volume
/// placements included.
pub(crate) fn list_schedule(inst: &Instance, tasks: &[SimTask]) -> Schedule {
    #[derive(Clone)]
    struct Pending {
        sim: SimTask,
        done: bool,
    }

    let mut by_proc: BTreeMap<usize, Vec<Pending>> = BTreeMap::new();
    for sim in tasks {
        by_proc
            .entry(sim.processor)
            .or_default()
            .push(Pending { sim: sim.clone(), done: false });
    }
    for list in by_proc.values_mut() {
        list.sort_by(|a, b| a.sim.priority.cmp(&b.sim.priority));
    }

    // Positive Map completions gate Reduce tasks; zero-volume Maps complete at
    // the job's release date and are folded in as a constant.
    let mut maps_pending: BTreeMap<usize, usize> = BTreeMap::new();
    let mut map_done_at: BTreeMap<usize, f64> = BTreeMap::new();
    for (ji, job) in inst.jobs.iter().enumerate() {
        for task in &job.tasks {
            if task.kind == TaskKind::Map {
                if task.volume > 0.0 {
                    *maps_pending.entry(ji).or_insert(0) += 1;
                } else {
                    let slot = map_done_at.entry(ji).or_insert(0.0);
                    *slot = slot.max(job.release);
                }
            }
        }
    }

    let mut events: Vec<f64> = tasks.iter().map(|t| t.available_from).collect();
    events.sort_by(|a, b| a.partial_cmp(b).unwrap());
    events.dedup();

    let mut proc_free: BTreeMap<usize, f64> = BTreeMap::new();
    let mut entries = Vec::new();
    let mut remaining = tasks.len();
    let mut cursor = 0;

    while remaining > 0 {
        debug_assert!(cursor < events.len(), "event queue exhausted with tasks pending");
        let now = events[cursor];
        cursor += 1;
        // A completion earlier in the queue may have freed several processors;
        // keep assigning at this instant until nothing more can start.
        loop {
            let mut started = false;
            for (&proc, list) in by_proc.iter_mut() {
                let free = proc_free.get(&proc).copied().unwrap_or(0.0);
                if free > now {
                    continue;
                }
                let choice = list.iter_mut().find(|p| {
                    if p.done || p.sim.available_from > now {
                        return false;
                    }
                    if p.sim.is_reduce {
                        let ji = p.sim.task.job;
                        if maps_pending.get(&ji).copied().unwrap_or(0) > 0 {
                            return false;
                        }
                        if map_done_at.get(&ji).copied().unwrap_or(0.0) > now {
                            return false;
                        }
                    }
                    true
                });
                if let Some(p) = choice {
                    let completion = now + p.sim.duration;
                    entries.push(ScheduleEntry {
                        task: p.sim.task,
                        processor: proc,
                        start: now,
                        duration: p.sim.duration,
                        speed: inst.task(p.sim.task).unwrap().1.volume / p.sim.duration,
                    });
                    p.done = true;
                    remaining -= 1;
                    proc_free.insert(proc, completion);
                    if !p.sim.is_reduce {
                        let ji = p.sim.task.job;
                        if let Some(n) = maps_pending.get_mut(&ji) {
                            *n -= 1;
                        }
                        let slot = map_done_at.entry(ji).or_insert(0.0);
                        *slot = slot.max(completion);
                    }
                    let pos = events[cursor..].partition_point(|&e| e < completion);
                    if events[cursor..]
                        .get(pos)
                        .map_or(true, |&e| e != completion)
                    {
                        events.insert(cursor + pos, completion);
                    }
                    started = true;
                }
            }
            if !started {
                break;
            }
        }
    }

    // Place zero-volume tasks: they are instantaneous and off the processors.
    for (ji, job) in inst.jobs.iter().enumerate() {
        for (ti, task) in job.tasks.iter().enumerate() {
            if task.volume > 0.0 {
                continue;
            }
            let at = match task.kind {
                TaskKind::Map => job.release,
                TaskKind::Reduce => {
                    job.release.max(map_done_at.get(&ji).copied().unwrap_or(0.0))
                }
            };
            entries.push(ScheduleEntry {
                task: TaskRef { job: ji, task: ti },
                processor: task.processor,
                start: at,
                duration: 0.0,
                speed: 0.0,
            });
        }
    }

    entries.sort_by(|a, b| {
        a.start
            .partial_cmp(&b.start)
            .unwrap()
            .then(a.processor.cmp(&b.processor))
            .then(a.task.cmp(&b.task))
    });
    Schedule { entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_schedule, Job, Task};

    fn job(id: u64, release: f64, tasks: Vec<Task>) -> Job {
        Job { id, weight: 1.0, release, tasks }
    }

    #[test]
    fn single_task_starts_at_availability() {
        let inst = Instance {
            beta: 2.0,
            energy_budget: 100.0,
            num_processors: 2,
            jobs: vec![job(
                1,
                0.0,
                vec![
                    Task { processor: 1, kind: TaskKind::Map, volume: 2.0 },
                    Task { processor: 2, kind: TaskKind::Reduce, volume: 0.0 },
                ],
            )],
        };
        let sched = list_schedule(
            &inst,
            &[SimTask {
                task: TaskRef { job: 0, task: 0 },
                processor: 1,
                duration: 2.0,
                available_from: 1.0,
                priority: (0, 1),
                is_reduce: false,
            }],
        );
        let map = sched.entries.iter().find(|e| e.task.task == 0).unwrap();
        assert_eq!((map.start, map.completion()), (1.0, 3.0));
        // The zero-volume Reduce fires once the Map is done.
        let red = sched.entries.iter().find(|e| e.task.task == 1).unwrap();
        assert_eq!(red.start, 3.0);
    }

    #[test]
    fn reduce_waits_for_sibling_map() {
        let inst = Instance {
            beta: 2.0,
            energy_budget: 100.0,
            num_processors: 2,
            jobs: vec![job(
                1,
                0.0,
                vec![
                    Task { processor: 1, kind: TaskKind::Map, volume: 1.0 },
                    Task { processor: 2, kind: TaskKind::Reduce, volume: 1.0 },
                ],
            )],
        };
        let sched = list_schedule(
            &inst,
            &[
                SimTask {
                    task: TaskRef { job: 0, task: 0 },
                    processor: 1,
                    duration: 1.0,
                    available_from: 0.0,
                    priority: (0, 1),
                    is_reduce: false,
                },
                SimTask {
                    task: TaskRef { job: 0, task: 1 },
                    processor: 2,
                    duration: 1.0,
                    available_from: 0.0,
                    priority: (0, 1),
                    is_reduce: true,
                },
            ],
        );
        let red = sched.entries.iter().find(|e| e.task.task == 1).unwrap();
        assert_eq!((red.start, red.completion()), (1.0, 2.0));
        assert!(validate_schedule(&inst, &sched, 100.0).unwrap().is_empty());
    }

    #[test]
    fn lower_priority_task_runs_when_head_is_unavailable() {
        // Two jobs, both tasks on processor 1. Job 1 has priority but is not
        // available until t = 5; job 2 runs first and job 1 follows.
        let inst = Instance {
            beta: 2.0,
            energy_budget: 100.0,
            num_processors: 3,
            jobs: vec![
                job(
                    1,
                    0.0,
                    vec![
                        Task { processor: 1, kind: TaskKind::Map, volume: 1.0 },
                        Task { processor: 2, kind: TaskKind::Reduce, volume: 0.0 },
                    ],
                ),
                job(
                    2,
                    0.0,
                    vec![
                        Task { processor: 1, kind: TaskKind::Map, volume: 1.0 },
                        Task { processor: 3, kind: TaskKind::Reduce, volume: 0.0 },
                    ],
                ),
            ],
        };
        let sched = list_schedule(
            &inst,
            &[
                SimTask {
                    task: TaskRef { job: 0, task: 0 },
                    processor: 1,
                    duration: 1.0,
                    available_from: 5.0,
                    priority: (0, 1),
                    is_reduce: false,
                },
                SimTask {
                    task: TaskRef { job: 1, task: 0 },
                    processor: 1,
                    duration: 1.0,
                    available_from: 0.0,
                    priority: (1, 2),
                    is_reduce: false,
                },
            ],
        );
        let first = sched.entries.iter().find(|e| e.task.job == 1 && e.duration > 0.0).unwrap();
        let second = sched.entries.iter().find(|e| e.task.job == 0 && e.duration > 0.0).unwrap();
        assert_eq!((first.start, first.completion()), (0.0, 1.0));
        assert_eq!((second.start, second.completion()), (5.0, 6.0));
    }

    #[test]
    fn two_job_hand_trace() {
        // Hand-traced: processor 1 holds both Maps, processor 2 both Reduces.
        // Plan: job 1 Map avail 0 dur 2, job 2 Map avail 1 dur 1,
        //       job 1 Reduce avail 0 dur 1, job 2 Reduce avail 2 dur 2.
        // p1: M1 [0,2), M2 [2,3). p2: R1 [2,3), R2 [3,5).
        let inst = Instance {
            beta: 2.0,
            energy_budget: 1000.0,
            num_processors: 2,
            jobs: vec![
                job(
                    1,
                    0.0,
                    vec![
                        Task { processor: 1, kind: TaskKind::Map, volume: 2.0 },
                        Task { processor: 2, kind: TaskKind::Reduce, volume: 1.0 },
                    ],
                ),
                job(
                    2,
                    0.0,
                    vec![
                        Task { processor: 1, kind: TaskKind::Map, volume: 1.0 },
                        Task { processor: 2, kind: TaskKind::Reduce, volume: 2.0 },
                    ],
                ),
            ],
        };
        let sched = list_schedule(
            &inst,
            &[
                SimTask {
                    task: TaskRef { job: 0, task: 0 },
                    processor: 1,
                    duration: 2.0,
                    available_from: 0.0,
                    priority: (0, 1),
                    is_reduce: false,
                },
                SimTask {
                    task: TaskRef { job: 1, task: 0 },
                    processor: 1,
                    duration: 1.0,
                    available_from: 1.0,
                    priority: (1, 2),
                    is_reduce: false,
                },
                SimTask {
                    task: TaskRef { job: 0, task: 1 },
                    processor: 2,
                    duration: 1.0,
                    available_from: 0.0,
                    priority: (0, 1),
                    is_reduce: true,
                },
                SimTask {
                    task: TaskRef { job: 1, task: 1 },
                    processor: 2,
                    duration: 2.0,
                    available_from: 2.0,
                    priority: (2, 2),
                    is_reduce: true,
                },
            ],
        );
        let find = |job: usize, task: usize| {
            sched.entries.iter().find(|e| e.task == TaskRef { job, task }).unwrap()
        };
        assert_eq!((find(0, 0).start, find(0, 0).completion()), (0.0, 2.0));
        assert_eq!((find(1, 0).start, find(1, 0).completion()), (2.0, 3.0));
        assert_eq!((find(0, 1).start, find(0, 1).completion()), (2.0, 3.0));
        assert_eq!((find(1, 1).start, find(1, 1).completion()), (3.0, 5.0));
        assert!(validate_schedule(&inst, &sched, 1000.0).unwrap().is_empty());
    }
}
