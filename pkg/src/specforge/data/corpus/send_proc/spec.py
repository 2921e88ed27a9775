def send_proc(old, pid):
    cond = z3.And(
        is_pid_valid(pid),
        old.procs[pid].state != dt.proc_state.PROC_UNUSED,
        z3.Implies(old.procs[pid].ipc_from != 0,
                   old.procs[pid].ipc_from == old.current))

    new = old.copy()
    new.procs[pid].ipc_from = old.current
    return cond, util.If(cond, new, old)
