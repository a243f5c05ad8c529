//! Pinning the measuring thread to one logical CPU.

/// Restrict the current thread to `cpu`. Returns whether the affinity
/// change took effect; timing proceeds either way, the caller just
/// records the outcome.
pub fn pin_to_cpu(cpu: usize) -> bool {
    #[cfg(target_os = "linux")]
    unsafe {
        // CPU_SET panics past the fixed set size rather than failing
        if cpu >= 8 * std::mem::size_of::<libc::cpu_set_t>() {
            return false;
        }
        let mut set: libc::cpu_set_t = std::mem::zeroed();
        libc::CPU_SET(cpu, &mut set);
        libc::sched_setaffinity(0, std::mem::size_of::<libc::cpu_set_t>(), &set) == 0
    }
    #[cfg(not(target_os = "linux"))]
    {
        let _ = cpu;
        false
    }
}
