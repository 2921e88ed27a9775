def sys_reclaim_page(old, pn):
    pid = old.pages[pn].owner
    cond = z3.And(
        is_pn_valid(pn),
        old.pages[pn].type != dt.page_type.PAGE_TYPE_FREE,
        is_pid_valid(pid),
        old.procs[pid].state == dt.proc_state.PROC_UNUSED,
        old.procs[pid].ppid == old.current,
        old.pages[pn].refcnt == 1)

    new = old.copy()
    new.pages[pn].refcnt -= 1
    new.pages[pn].type = dt.page_type.PAGE_TYPE_FREE
    new.pages[pn].owner = z3.BitVecVal(0, dt.pid_t)
    new.procs[pid].nr_pages -= 1
    return cond, util.If(cond, new, old)
