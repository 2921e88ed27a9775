def sys_set_ipc_from(old, pid, sender):
    cond = z3.And(
        is_pid_valid(pid),
        z3.Or(old.procs[pid].ppid == old.current, pid == old.current),
        z3.Implies(sender != 0, is_pid_valid(sender)))

    new = old.copy()
    new.procs[pid].ipc_from = sender
    return cond, util.If(cond, new, old)
