//! Platform calls used by the live backend, kept behind one boundary.

use std::io;
use std::os::fd::AsRawFd;
use std::time::{SystemTime, UNIX_EPOCH};

pub fn page_size() -> u64 {
    // Safety: sysconf has no preconditions.
    let n = unsafe { libc::sysconf(libc::_SC_PAGESIZE) };
    if n <= 0 {
        4096
    } else {
        n as u64
    }
}

fn check(ret: libc::c_int) -> io::Result<()> {
    if ret == 0 {
        Ok(())
    } else {
        Err(io::Error::last_os_error())
    }
}

/// `posix_fadvise(POSIX_FADV_DONTNEED)` over a byte range of `file`.
pub fn fadvise_dontneed(file: &impl AsRawFd, offset: u64, len: u64) -> io::Result<()> {
    // Safety: plain syscall on a valid descriptor; it reports errors by value.
    let ret = unsafe {
        libc::posix_fadvise(
            file.as_raw_fd(),
            offset as libc::off_t,
            len as libc::off_t,
            libc::POSIX_FADV_DONTNEED,
        )
    };
    if ret == 0 {
        Ok(())
    } else {
        Err(io::Error::from_raw_os_error(ret))
    }
}

/// Drops this process's page-table entries for `[addr, addr + len)`. On a
/// private file mapping that was only read this leaves the page cache alone.
///
/// # Safety
///
/// The range must be a page-aligned part of a read-only private file mapping
/// that nobody holds references into.
pub unsafe fn madvise_dontneed(addr: *const u8, len: usize) -> io::Result<()> {
    check(unsafe { libc::madvise(addr as *mut libc::c_void, len, libc::MADV_DONTNEED) })
}

/// Turns off fault-around readahead for the range.
///
/// # Safety
///
/// The range must be page-aligned and mapped.
pub unsafe fn madvise_random(addr: *const u8, len: usize) -> io::Result<()> {
    check(unsafe { libc::madvise(addr as *mut libc::c_void, len, libc::MADV_RANDOM) })
}

/// Page-cache residency of each page in `[addr, addr + len)`.
///
/// # Safety
///
/// The range must be page-aligned and mapped.
pub unsafe fn mincore(addr: *const u8, len: usize) -> io::Result<Vec<bool>> {
    let page = page_size() as usize;
    let mut vec = vec![0u8; len.div_ceil(page)];
    check(unsafe { libc::mincore(addr as *mut libc::c_void, len, vec.as_mut_ptr() as *mut _) })?;
    // only the low bit is defined
    Ok(vec.into_iter().map(|b| b & 1 != 0).collect())
}

/// CPUs the calling thread may run on.
#[cfg(target_os = "linux")]
pub fn allowed_cpus() -> io::Result<Vec<usize>> {
    // Safety: zeroed cpu_set_t is a valid empty set.
    let mut set: libc::cpu_set_t = unsafe { std::mem::zeroed() };
    check(unsafe { libc::sched_getaffinity(0, std::mem::size_of::<libc::cpu_set_t>(), &mut set) })?;
    Ok((0..libc::CPU_SETSIZE as usize)
        .filter(|&cpu| unsafe { libc::CPU_ISSET(cpu, &set) })
        .collect())
}

/// Restricts the calling thread (and threads it spawns later) to `cpus`.
#[cfg(target_os = "linux")]
pub fn set_thread_affinity(cpus: &[usize]) -> io::Result<()> {
    let mut set: libc::cpu_set_t = unsafe { std::mem::zeroed() };
    for &cpu in cpus {
        unsafe { libc::CPU_SET(cpu, &mut set) };
    }
    check(unsafe { libc::sched_setaffinity(0, std::mem::size_of::<libc::cpu_set_t>(), &set) })
}

#[cfg(not(target_os = "linux"))]
pub fn allowed_cpus() -> io::Result<Vec<usize>> {
    Err(io::ErrorKind::Unsupported.into())
}

#[cfg(not(target_os = "linux"))]
pub fn set_thread_affinity(_cpus: &[usize]) -> io::Result<()> {
    Err(io::ErrorKind::Unsupported.into())
}

/// Major faults and voluntary context switches of the calling thread so far.
#[cfg(target_os = "linux")]
pub fn thread_fault_counters() -> io::Result<(u64, u64)> {
    let mut usage: libc::rusage = unsafe { std::mem::zeroed() };
    check(unsafe { libc::getrusage(libc::RUSAGE_THREAD, &mut usage) })?;
    Ok((usage.ru_majflt as u64, usage.ru_nvcsw as u64))
}

#[cfg(not(target_os = "linux"))]
pub fn thread_fault_counters() -> io::Result<(u64, u64)> {
    Err(io::ErrorKind::Unsupported.into())
}

/// Wall-clock time in nanoseconds since the Unix epoch.
pub fn realtime_ns() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_nanos() as u64)
        .unwrap_or(0)
}

/// Blocks until the wall clock reaches `deadline_ns`.
#[cfg(target_os = "linux")]
pub fn sleep_until_realtime(deadline_ns: u64) {
    let ts = libc::timespec {
        tv_sec: (deadline_ns / 1_000_000_000) as libc::time_t,
        tv_nsec: (deadline_ns % 1_000_000_000) as libc::c_long,
    };
    loop {
        // Safety: ts is a valid absolute timespec; remain may be null with TIMER_ABSTIME.
        let ret =
            unsafe { libc::clock_nanosleep(libc::CLOCK_REALTIME, libc::TIMER_ABSTIME, &ts, std::ptr::null_mut()) };
        if ret != libc::EINTR {
            break;
        }
    }
}

#[cfg(not(target_os = "linux"))]
pub fn sleep_until_realtime(deadline_ns: u64) {
    let now = realtime_ns();
    if deadline_ns > now {
        std::thread::sleep(std::time::Duration::from_nanos(deadline_ns - now));
    }
}
