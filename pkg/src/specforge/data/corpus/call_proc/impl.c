// guide: IPC system calls, pre-condition translation
int call_proc(pid_t pid)
{
    struct proc *recv;
    struct proc *self;

    if (!is_pid_valid(pid))
        return -ESRCH;
    if (pid == current)
        return -EINVAL;
    recv = get_proc(pid);
    if (recv->state != PROC_RUNNABLE)
        return -EAGAIN;
    if (recv->ipc_from != 0 && recv->ipc_from != current)
        return -EACCES;

    recv->ipc_from = current;
    recv->state = PROC_RUNNING;
    self = get_proc(current);
    self->state = PROC_RUNNABLE;
    return 0;
}
