def sys_alloc_page(old, pid, pn):
    cond = z3.And(
        is_pid_valid(pid),
        z3.Or(old.procs[pid].ppid == old.current, pid == old.current),
        is_pn_valid(pn),
        old.pages[pn].type == dt.page_type.PAGE_TYPE_FREE)

    new = old.copy()
    new.pages[pn].type = dt.page_type.PAGE_TYPE_FRAME
    new.pages[pn].owner = pid
    new.pages[pn].refcnt = z3.BitVecVal(1, 64)
    new.procs[pid].nr_pages += 1
    return cond, util.If(cond, new, old)
