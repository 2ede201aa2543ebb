use std::fmt;
use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use memmap2::MmapOptions;

use super::sys;

/// What the host offers the live channel. Each flag comes from a small
/// experiment, not from configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BackendCapabilities {
    pub shared_readonly_mapping: bool,
    pub cache_advice_eviction: bool,
    pub cpu_affinity: bool,
    /// A read of an evicted page took a major fault and the thread gave up the
    /// CPU while it waited.
    pub switch_on_hard_fault: bool,
}

impl BackendCapabilities {
    /// The three properties a transmission cannot start without.
    pub fn ready(&self) -> bool {
        self.shared_readonly_mapping && self.cache_advice_eviction && self.cpu_affinity
    }

    pub fn missing(&self) -> Vec<&'static str> {
        [
            ("shared_readonly_mapping", self.shared_readonly_mapping),
            ("cache_advice_eviction", self.cache_advice_eviction),
            ("cpu_affinity", self.cpu_affinity),
            ("switch_on_hard_fault", self.switch_on_hard_fault),
        ]
        .into_iter()
        .filter(|(_, ok)| !ok)
        .map(|(name, _)| name)
        .collect()
    }
}

impl fmt::Display for BackendCapabilities {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "shared_readonly_mapping={} cache_advice_eviction={} cpu_affinity={} switch_on_hard_fault={}",
            self.shared_readonly_mapping, self.cache_advice_eviction, self.cpu_affinity, self.switch_on_hard_fault
        )
    }
}

const PROBE_PAGES: u64 = 4;

struct ScratchFile(PathBuf);

impl Drop for ScratchFile {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

/// Probes the host using a scratch file created in `scratch_dir`, which should
/// sit on the same filesystem as the backing file. Failures show up as false
/// flags, never as errors.
pub fn probe_capabilities(scratch_dir: &Path) -> BackendCapabilities {
    let mut caps = BackendCapabilities {
        cpu_affinity: probe_affinity(),
        ..Default::default()
    };
    // stay off the caller's thread so its counters and affinity are untouched
    let dir = scratch_dir.to_owned();
    let (mapping, eviction, switch) = std::thread::spawn(move || probe_mapping(&dir))
        .join()
        .unwrap_or((false, false, false));
    caps.shared_readonly_mapping = mapping;
    caps.cache_advice_eviction = eviction;
    caps.switch_on_hard_fault = switch;
    caps
}

fn probe_affinity() -> bool {
    std::thread::spawn(|| {
        let Ok(cpus) = sys::allowed_cpus() else {
            return false;
        };
        let Some(&first) = cpus.first() else {
            return false;
        };
        sys::set_thread_affinity(&[first]).is_ok() && sys::allowed_cpus().is_ok_and(|now| now == [first])
    })
    .join()
    .unwrap_or(false)
}

fn probe_mapping(dir: &Path) -> (bool, bool, bool) {
    let page = sys::page_size();
    let path = dir.join(format!(".pfchan-probe-{}", std::process::id()));
    let scratch = ScratchFile(path);
    let written = File::create(&scratch.0).and_then(|mut f| {
        let chunk: Vec<u8> = (0..page).map(|i| (i % 251) as u8 + 1).collect();
        for _ in 0..PROBE_PAGES {
            f.write_all(&chunk)?;
        }
        // clean pages can be dropped, dirty ones cannot
        f.sync_all()
    });
    if written.is_err() {
        return (false, false, false);
    }
    let Ok(file) = File::open(&scratch.0) else {
        return (false, false, false);
    };
    let len = (page * PROBE_PAGES) as usize;
    // Safety: private read-only mapping of a file only this function touches.
    let Ok(map) = (unsafe { MmapOptions::new().len(len).map_copy_read_only(&file) }) else {
        return (false, false, false);
    };
    let mapped_ok = unsafe { std::ptr::read_volatile(map.as_ptr()) } == 1;
    if !mapped_ok {
        return (false, false, false);
    }

    let target = unsafe { map.as_ptr().add(page as usize) };
    let resident = |ptr| unsafe { sys::mincore(ptr, page as usize) }.ok().map(|v| v[0]);
    let _ = unsafe { std::ptr::read_volatile(target) };
    let was_resident = resident(target) == Some(true);
    let evicted = was_resident
        && unsafe { sys::madvise_dontneed(target, page as usize) }.is_ok()
        && sys::fadvise_dontneed(&file, page, page).is_ok()
        && resident(target) == Some(false);
    if !evicted {
        return (true, false, false);
    }

    let before = sys::thread_fault_counters();
    let _ = unsafe { std::ptr::read_volatile(target) };
    let after = sys::thread_fault_counters();
    let switched = match (before, after) {
        (Ok((maj0, sw0)), Ok((maj1, sw1))) => maj1 > maj0 && sw1 > sw0,
        _ => false,
    };
    (true, true, switched)
}
