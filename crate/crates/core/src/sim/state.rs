use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{AccessRecord, AccessTrace, PageCache, SimParams, ThreadId};
use crate::channel::{
    encode_target, page_pair_for_slot, ChannelConfig, FaultKind, ObservedOrder, PagePair, Payload, Residency,
};
use crate::error::ConfigError;

/// Address spaces tracked for soft-fault purposes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Process {
    Trojan,
    Spy,
}

impl ThreadId {
    pub fn process(self) -> Process {
        match self {
            ThreadId::Trojan => Process::Trojan,
            ThreadId::T1 | ThreadId::T2 => Process::Spy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TouchOutcome {
    pub fault: FaultKind,
    /// Tick at which the access finishes, or at which the page arrives from
    /// disk for a hard fault.
    pub completion: u64,
}

/// What one spy slot looked like from inside the simulator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpySlotOutcome {
    pub pair: PagePair,
    pub order: ObservedOrder,
    /// Classification of each thread's first access, `[t1, t2]`.
    pub faults: [FaultKind; 2],
    /// Whether each thread blocked on disk at any point.
    pub hard_faulted: [bool; 2],
    pub started_at: u64,
    pub completed_at: [u64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Waiter {
    Spy(usize),
    Trojan,
}

#[derive(Debug)]
enum Event {
    FetchDone(Vec<u64>),
    ThreadDone(usize),
    Dispatch,
    TrojanSlot(u64),
    SpySlot(PagePair),
}

impl Event {
    /// Same-tick ordering: I/O completions land before anything observes the
    /// cache, then the spy core, then the programs.
    fn class(&self) -> u8 {
        match self {
            Event::FetchDone(_) => 0,
            Event::ThreadDone(_) => 1,
            Event::Dispatch => 2,
            Event::TrojanSlot(_) => 3,
            Event::SpySlot(_) => 4,
        }
    }
}

#[derive(Debug)]
struct Scheduled {
    tick: u64,
    class: u8,
    seq: u64,
    event: Event,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scheduled {}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scheduled {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.tick, self.class, self.seq).cmp(&(other.tick, other.class, other.seq))
    }
}

#[derive(Debug, Clone)]
struct SpyThread {
    id: ThreadId,
    page: u64,
    first_fault: Option<FaultKind>,
    hard: bool,
    done_at: Option<u64>,
}

#[derive(Debug, Clone)]
struct ActiveSlot {
    pair: PagePair,
    started_at: u64,
    threads: [SpyThread; 2],
}

#[derive(Debug, Clone)]
pub(crate) struct Plan {
    pub cfg: ChannelConfig,
    pub payload: Payload,
    pub period: u64,
    pub guard: u64,
}

impl Plan {
    fn sender_deadline(&self, k: u64) -> u64 {
        k * self.period
    }

    fn receiver_deadline(&self, k: u64) -> u64 {
        k * self.period + self.guard
    }
}

/// Page cache, per-process mappings, disk queue, and the spy core.
#[derive(Debug)]
pub struct SimState {
    params: SimParams,
    region_pages: u64,
    now: u64,
    cache: PageCache,
    mapped: HashMap<Process, HashSet<u64>>,
    in_flight: HashMap<u64, u64>,
    accessed: HashSet<u64>,
    disk_free_at: u64,
    rng: ChaCha8Rng,
    events: BinaryHeap<Reverse<Scheduled>>,
    seq: u64,
    waiters: HashMap<u64, Vec<Waiter>>,
    run_queue: VecDeque<usize>,
    running: Option<usize>,
    dispatch_pending: bool,
    slot: Option<ActiveSlot>,
    outcomes: Vec<SpySlotOutcome>,
    trace: AccessTrace,
    plan: Option<Plan>,
    trojan_slot: Option<u64>,
    sender_overruns: u64,
}

impl SimState {
    /// Empty cache over a region of `region_pages` pages; `seed` drives the
    /// eviction-retention draws.
    pub fn new(params: SimParams, region_pages: u64, seed: u64) -> Result<Self, ConfigError> {
        params.validate()?;
        if region_pages == 0 {
            return Err(ConfigError::EmptyRegion);
        }
        Ok(SimState {
            cache: PageCache::new(params.cache_capacity),
            params,
            region_pages,
            now: 0,
            mapped: HashMap::from([(Process::Trojan, HashSet::new()), (Process::Spy, HashSet::new())]),
            in_flight: HashMap::new(),
            accessed: HashSet::new(),
            disk_free_at: 0,
            rng: ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_cafe_f00d_d00d),
            events: BinaryHeap::new(),
            seq: 0,
            waiters: HashMap::new(),
            run_queue: VecDeque::new(),
            running: None,
            dispatch_pending: false,
            slot: None,
            outcomes: Vec::new(),
            trace: AccessTrace::default(),
            plan: None,
            trojan_slot: None,
            sender_overruns: 0,
        })
    }

    pub fn params(&self) -> &SimParams {
        &self.params
    }

    pub fn region_pages(&self) -> u64 {
        self.region_pages
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn trace(&self) -> &AccessTrace {
        &self.trace
    }

    pub fn cache(&self) -> &PageCache {
        &self.cache
    }

    pub fn outcomes(&self) -> &[SpySlotOutcome] {
        &self.outcomes
    }

    /// Sender slots that started after their deadline.
    pub fn sender_overruns(&self) -> u64 {
        self.sender_overruns
    }

    pub fn residency(&self, page: u64) -> Residency {
        if self.cache.contains(page) {
            Residency::Resident
        } else {
            Residency::Evicted
        }
    }

    pub fn is_mapped(&self, process: Process, page: u64) -> bool {
        self.mapped[&process].contains(&page)
    }

    /// Brings `page` into the cache without mapping it anywhere, as if some
    /// other process had read it.
    pub fn make_resident(&mut self, page: u64) {
        self.insert_page(page);
    }

    /// Resident and mapped into `process`.
    pub fn map(&mut self, process: Process, page: u64) {
        self.insert_page(page);
        self.mapped.get_mut(&process).unwrap().insert(page);
    }

    /// Fault an access to `page` would take given whether the accessor maps it.
    pub fn classify_access(&self, page: u64, mapped: bool) -> FaultKind {
        if !self.cache.contains(page) {
            FaultKind::HardFault
        } else if mapped {
            FaultKind::NoFault
        } else {
            FaultKind::SoftFault
        }
    }

    fn fault_for(&self, process: Process, page: u64) -> FaultKind {
        self.classify_access(page, self.is_mapped(process, page))
    }

    /// Drops `pages` from the cache and every mapping of them. Pages with a
    /// fetch in flight are locked and stay put.
    pub fn evict(&mut self, pages: &[u64]) {
        for &page in pages {
            if self.in_flight.contains_key(&page) {
                continue;
            }
            self.cache.remove(page);
            self.unmap_everywhere(page);
        }
    }

    /// Don't-need advice: like [`evict`](Self::evict), except that a previously
    /// accessed page survives with probability `warm_retention`. One random
    /// draw is consumed per page whatever its state. Returns the retained pages.
    pub fn advise_dontneed(&mut self, pages: &[u64]) -> Vec<u64> {
        let mut retained = Vec::new();
        for &page in pages {
            let draw: f64 = self.rng.random();
            let warm = self.accessed.contains(&page) && self.cache.contains(page);
            if warm && draw < self.params.warm_retention {
                retained.push(page);
            } else {
                self.evict(&[page]);
            }
        }
        retained
    }

    /// Access `page` from `thread` at the current tick. Non-hard accesses map
    /// the page and complete after `mem_latency`; a hard fault queues a disk
    /// fetch (or joins one already in flight) and reports when it lands.
    pub fn touch(&mut self, thread: ThreadId, page: u64) -> TouchOutcome {
        let process = thread.process();
        let fault = self.fault_for(process, page);
        self.accessed.insert(page);
        self.trace.push(AccessRecord {
            tick: self.now,
            thread,
            page,
            fault,
        });
        let completion = match fault {
            FaultKind::HardFault => self.fetch(page),
            FaultKind::NoFault | FaultKind::SoftFault => {
                self.mapped.get_mut(&process).unwrap().insert(page);
                self.cache.touch(page);
                self.now + self.params.mem_latency
            }
        };
        TouchOutcome { fault, completion }
    }

    /// Runs one spy slot on `pair` starting now, with t1 dispatched first, and
    /// returns the outcome plus the accesses it produced.
    pub fn run_spy_slot(&mut self, pair: PagePair) -> (SpySlotOutcome, AccessTrace) {
        assert!(self.slot.is_none() && self.plan.is_none(), "spy slot already active");
        let mark = self.trace.len();
        let before = self.outcomes.len();
        self.schedule(self.now, Event::SpySlot(pair));
        self.run();
        debug_assert_eq!(self.outcomes.len(), before + 1);
        let outcome = self.outcomes.last().cloned().expect("slot finished");
        (outcome, self.trace.since(mark))
    }

    pub(crate) fn install_plan(&mut self, plan: Plan) {
        if !plan.payload.is_empty() {
            self.schedule(plan.sender_deadline(0), Event::TrojanSlot(0));
            let pair = page_pair_for_slot(&plan.cfg, 0);
            self.schedule(plan.receiver_deadline(0), Event::SpySlot(pair));
        }
        self.plan = Some(plan);
    }

    /// Processes events until nothing is left to do.
    pub(crate) fn run(&mut self) {
        while let Some(Reverse(next)) = self.events.pop() {
            debug_assert!(next.tick >= self.now);
            self.now = next.tick;
            match next.event {
                Event::FetchDone(pages) => self.on_fetch_done(pages),
                Event::ThreadDone(idx) => self.on_thread_done(idx),
                Event::Dispatch => self.on_dispatch(),
                Event::TrojanSlot(k) => self.on_trojan_slot(k),
                Event::SpySlot(pair) => self.on_spy_slot(pair),
            }
        }
    }

    fn schedule(&mut self, tick: u64, event: Event) {
        self.seq += 1;
        self.events.push(Reverse(Scheduled {
            tick,
            class: event.class(),
            seq: self.seq,
            event,
        }));
    }

    fn insert_page(&mut self, page: u64) {
        if let Some(victim) = self.cache.insert(page) {
            self.unmap_everywhere(victim);
        }
    }

    fn unmap_everywhere(&mut self, page: u64) {
        for set in self.mapped.values_mut() {
            set.remove(&page);
        }
    }

    /// Queues a fetch of `page` (plus readahead) on the FIFO disk and returns
    /// its completion tick.
    fn fetch(&mut self, page: u64) -> u64 {
        if let Some(&done) = self.in_flight.get(&page) {
            return done;
        }
        let start = self.now.max(self.disk_free_at);
        let done = start + self.params.disk_latency;
        self.disk_free_at = done;
        let mut pages = vec![page];
        for extra in 1..self.params.readahead {
            let p = page + extra;
            if p >= self.region_pages {
                break;
            }
            if !self.cache.contains(p) && !self.in_flight.contains_key(&p) {
                pages.push(p);
            }
        }
        for &p in &pages {
            self.in_flight.insert(p, done);
        }
        self.schedule(done, Event::FetchDone(pages));
        done
    }

    fn request_dispatch(&mut self, tick: u64) {
        if self.running.is_none() && !self.dispatch_pending && !self.run_queue.is_empty() {
            self.dispatch_pending = true;
            self.schedule(tick, Event::Dispatch);
        }
    }

    fn on_fetch_done(&mut self, pages: Vec<u64>) {
        for &page in &pages {
            self.in_flight.remove(&page);
            self.insert_page(page);
        }
        for page in pages {
            for waiter in self.waiters.remove(&page).unwrap_or_default() {
                match waiter {
                    Waiter::Spy(idx) => {
                        self.run_queue.push_back(idx);
                        self.request_dispatch(self.now);
                    }
                    Waiter::Trojan => self.trojan_resume(page),
                }
            }
        }
    }

    fn on_dispatch(&mut self) {
        self.dispatch_pending = false;
        if self.running.is_some() {
            return;
        }
        let Some(idx) = self.run_queue.pop_front() else {
            return;
        };
        self.running = Some(idx);
        let slot = self.slot.as_ref().expect("dispatch without a slot");
        let (id, page, resumed) = {
            let th = &slot.threads[idx];
            (th.id, th.page, th.first_fault.is_some())
        };
        if resumed && self.cache.contains(page) {
            // woken after its fetch: finish the faulting access
            self.mapped.get_mut(&Process::Spy).unwrap().insert(page);
            self.cache.touch(page);
            self.schedule(self.now + self.params.mem_latency, Event::ThreadDone(idx));
            return;
        }
        let outcome = self.touch(id, page);
        let th = &mut self.slot.as_mut().unwrap().threads[idx];
        th.first_fault.get_or_insert(outcome.fault);
        match outcome.fault {
            FaultKind::HardFault => {
                th.hard = true;
                self.waiters.entry(page).or_default().push(Waiter::Spy(idx));
                self.running = None;
                let at = self.now + self.params.switch_cost;
                self.request_dispatch(at);
            }
            FaultKind::NoFault | FaultKind::SoftFault => {
                self.schedule(outcome.completion, Event::ThreadDone(idx));
            }
        }
    }

    fn on_thread_done(&mut self, idx: usize) {
        let now = self.now;
        let slot = self.slot.as_mut().expect("thread finished without a slot");
        slot.threads[idx].done_at = Some(now);
        let all_done = slot.threads.iter().all(|t| t.done_at.is_some());
        self.running = None;
        if all_done {
            self.finish_slot();
        } else {
            self.request_dispatch(now);
        }
    }

    fn on_spy_slot(&mut self, pair: PagePair) {
        debug_assert!(self.slot.is_none());
        let thread = |id, page| SpyThread {
            id,
            page,
            first_fault: None,
            hard: false,
            done_at: None,
        };
        self.slot = Some(ActiveSlot {
            pair,
            started_at: self.now,
            threads: [thread(ThreadId::T1, pair.p1), thread(ThreadId::T2, pair.p2)],
        });
        self.run_queue.extend([0, 1]);
        self.request_dispatch(self.now);
    }

    fn finish_slot(&mut self) {
        let slot = self.slot.take().unwrap();
        let [t1, t2] = &slot.threads;
        let (d1, d2) = (t1.done_at.unwrap(), t2.done_at.unwrap());
        let order = if t1.hard != t2.hard {
            if d1 > d2 {
                ObservedOrder::T1Last
            } else {
                ObservedOrder::T2Last
            }
        } else {
            ObservedOrder::Ambiguous
        };
        self.outcomes.push(SpySlotOutcome {
            pair: slot.pair,
            order,
            faults: [t1.first_fault.unwrap(), t2.first_fault.unwrap()],
            hard_faulted: [t1.hard, t2.hard],
            started_at: slot.started_at,
            completed_at: [d1, d2],
        });
        if let Some(plan) = &self.plan {
            let next = slot.pair.slot + 1;
            if next < plan.payload.len() as u64 {
                let at = plan.receiver_deadline(next).max(self.now);
                let pair = page_pair_for_slot(&plan.cfg, next);
                self.schedule(at, Event::SpySlot(pair));
            }
        }
    }

    fn on_trojan_slot(&mut self, k: u64) {
        let plan = self.plan.as_ref().expect("trojan slot without a plan");
        if self.now > plan.sender_deadline(k) {
            self.sender_overruns += 1;
        }
        let pair = page_pair_for_slot(&plan.cfg, k);
        let target = encode_target(plan.payload[k as usize], &pair);
        self.advise_dontneed(&pair.pages());
        let outcome = self.touch(ThreadId::Trojan, target);
        match outcome.fault {
            FaultKind::HardFault => {
                self.waiters.entry(target).or_default().push(Waiter::Trojan);
                self.trojan_slot = Some(k);
            }
            FaultKind::NoFault | FaultKind::SoftFault => self.trojan_next(k, outcome.completion),
        }
    }

    fn trojan_resume(&mut self, page: u64) {
        self.mapped.get_mut(&Process::Trojan).unwrap().insert(page);
        self.cache.touch(page);
        let k = self.trojan_slot.take().expect("trojan was not waiting");
        self.trojan_next(k, self.now + self.params.mem_latency);
    }

    fn trojan_next(&mut self, k: u64, free_at: u64) {
        let plan = self.plan.as_ref().unwrap();
        let next = k + 1;
        if next < plan.payload.len() as u64 {
            let at = plan.sender_deadline(next).max(free_at);
            self.schedule(at, Event::TrojanSlot(next));
        }
    }
}
