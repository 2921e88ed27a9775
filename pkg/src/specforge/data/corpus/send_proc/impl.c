// guide: IPC system calls, state pointers
int send_proc(pid_t pid)
{
    struct proc *recv;

    if (!is_pid_valid(pid))
        return -ESRCH;
    recv = get_proc(pid);
    if (recv->state == PROC_UNUSED)
        return -ESRCH;
    if (recv->ipc_from != 0 && recv->ipc_from != current)
        return -EACCES;

    recv->ipc_from = current;
    return 0;
}
