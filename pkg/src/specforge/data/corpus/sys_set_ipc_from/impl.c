// guide: IPC system calls, C helper functions
int sys_set_ipc_from(pid_t pid, pid_t sender)
{
    struct proc *proc;

    if (!is_pid_valid(pid))
        return -ESRCH;
    proc = get_proc(pid);
    if (proc->ppid != current && pid != current)
        return -EACCES;
    if (sender != 0 && !is_pid_valid(sender))
        return -EINVAL;

    proc->ipc_from = sender;
    return 0;
}
