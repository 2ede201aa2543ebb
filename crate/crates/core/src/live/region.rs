use std::fs::File;
use std::path::{Path, PathBuf};

use memmap2::{Mmap, MmapOptions};

use super::sys;
use crate::channel::{ChannelConfig, PagePair, Residency};
use crate::error::{Error, Result};

/// Private, read-only mapping of the backing file shared by trojan and spy.
#[derive(Debug)]
pub struct SharedRegion {
    path: PathBuf,
    file: File,
    map: Mmap,
    page_size: u64,
    pages: u64,
}

/// Result of advising the kernel to drop a pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvictionOutcome {
    /// The residency probe shows both pages gone.
    Confirmed,
    /// The probe still sees these pages resident; the advice was not honored.
    StillResident(Vec<u64>),
    /// No residency probe on this platform.
    Unverified,
}

/// Maps the first `cfg.region_size` bytes of `path` copy-on-write and
/// read-only. No page is touched.
pub fn open_region(path: impl AsRef<Path>, cfg: &ChannelConfig) -> Result<SharedRegion> {
    cfg.validate()?;
    let path = path.as_ref();
    let sys_page = sys::page_size();
    if !cfg.page_size.is_multiple_of(sys_page) {
        return Err(Error::Setup {
            msg: format!(
                "page_size {} is not a multiple of the system page size {sys_page}",
                cfg.page_size
            ),
            hint: "set page_size to the system page size",
        });
    }
    let file = File::open(path).map_err(|e| Error::Setup {
        msg: format!("cannot open {}: {e}", path.display()),
        hint: "create the backing file and make it readable by both processes",
    })?;
    let len = file.metadata().map_err(|e| Error::io(path, e))?.len();
    if len < cfg.region_size {
        return Err(Error::Setup {
            msg: format!("{} holds {len} bytes, region needs {}", path.display(), cfg.region_size),
            hint: "grow the file, e.g. `head -c <region_size> /dev/urandom > file`",
        });
    }
    // Safety: the mapping is read-only and private; the backing file is only
    // ever read through it.
    let map = unsafe {
        MmapOptions::new()
            .len(cfg.region_size as usize)
            .map_copy_read_only(&file)
    }
    .map_err(|e| Error::Setup {
        msg: format!("mmap of {} failed: {e}", path.display()),
        hint: "the backing file must live on a filesystem that supports mmap",
    })?;
    // Safety: whole mapping, page-aligned by construction.
    if let Err(e) = unsafe { sys::madvise_random(map.as_ptr(), map.len()) } {
        log::warn!("MADV_RANDOM refused ({e}); readahead may blur pairs");
    }
    Ok(SharedRegion {
        path: path.to_owned(),
        file,
        map,
        page_size: cfg.page_size,
        pages: cfg.region_pages(),
    })
}

impl SharedRegion {
    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> u64 {
        self.map.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn page_count(&self) -> u64 {
        self.pages
    }

    pub fn page_size(&self) -> u64 {
        self.page_size
    }

    fn page_ptr(&self, page: u64) -> *const u8 {
        assert!(page < self.pages, "page {page} outside region of {} pages", self.pages);
        // in bounds: page < pages and pages * page_size == map.len()
        unsafe { self.map.as_ptr().add((page * self.page_size) as usize) }
    }

    /// Reads the first byte of `page`, faulting it in if needed.
    pub fn read_page(&self, page: u64) -> u8 {
        // Safety: pointer is inside the live mapping.
        unsafe { std::ptr::read_volatile(self.page_ptr(page)) }
    }

    /// Page-cache residency of `page`, if the platform can tell.
    pub fn residency(&self, page: u64) -> Option<Residency> {
        // Safety: one mapped, page-aligned page.
        let resident = unsafe { sys::mincore(self.page_ptr(page), self.page_size as usize) }.ok()?;
        Some(if resident.iter().any(|&r| r) {
            Residency::Resident
        } else {
            Residency::Evicted
        })
    }

    /// Removes this process's mappings of `pages` so they no longer pin the
    /// page cache. Residency is unaffected.
    pub fn drop_mappings(&self, pages: &[u64]) -> Result<()> {
        for &page in pages {
            // Safety: read-only private mapping; no references into it escape
            // `read_page`, which copies the byte out.
            unsafe { sys::madvise_dontneed(self.page_ptr(page), self.page_size as usize) }
                .map_err(|e| Error::Runtime(format!("madvise(DONTNEED) on page {page}: {e}")))?;
        }
        Ok(())
    }

    /// Flushes and drops the whole region from the page cache so every page
    /// starts out on disk. Also breaks up large cache folios left over from
    /// writing the file, which single-page advice cannot drop.
    pub fn evict_all(&self) -> Result<()> {
        if let Err(e) = self.file.sync_data() {
            log::debug!("fdatasync on {}: {e}", self.path.display());
        }
        sys::fadvise_dontneed(&self.file, 0, self.len())
            .map_err(|e| Error::Runtime(format!("posix_fadvise(DONTNEED) on region: {e}")))
    }

    /// Advises the kernel to drop both pages of `pair` from the page cache and
    /// checks the result where a residency probe exists.
    pub fn evict_pair(&self, pair: &PagePair) -> Result<EvictionOutcome> {
        self.drop_mappings(&pair.pages())?;
        for page in pair.pages() {
            sys::fadvise_dontneed(&self.file, page * self.page_size, self.page_size)
                .map_err(|e| Error::Runtime(format!("posix_fadvise(DONTNEED) on page {page}: {e}")))?;
        }
        let mut still = Vec::new();
        for page in pair.pages() {
            match self.residency(page) {
                None => return Ok(EvictionOutcome::Unverified),
                Some(Residency::Resident) => still.push(page),
                Some(Residency::Evicted) => {}
            }
        }
        Ok(if still.is_empty() {
            EvictionOutcome::Confirmed
        } else {
            EvictionOutcome::StillResident(still)
        })
    }
}
