def call_proc(old, pid):
    cond = z3.And(
        is_pid_valid(pid),
        pid != old.current,
        old.procs[pid].state == dt.proc_state.PROC_RUNNABLE,
        z3.Implies(old.procs[pid].ipc_from != 0,
                   old.procs[pid].ipc_from == old.current))

    new = old.copy()
    new.procs[pid].ipc_from = old.current
    new.procs[pid].state = dt.proc_state.PROC_RUNNING
    new.procs[old.current].state = dt.proc_state.PROC_RUNNABLE
    return cond, util.If(cond, new, old)
