// guide: map field syntax, field name mapping
int sys_dup(fd_t oldfd, fd_t newfd)
{
    struct proc *proc;

    if (!is_fd_valid(oldfd))
        return -EBADF;
    if (!is_fd_valid(newfd))
        return -EBADF;
    proc = get_proc(current);
    if (proc->offs[newfd] != 0)
        return -EBUSY;

    proc->offs[newfd] = proc->offs[oldfd];
    return 0;
}
