// guide: reference counting, field name mapping
int sys_alloc_page(pid_t pid, pn_t pn)
{
    struct proc *proc;
    struct page *page;

    if (!is_pid_valid(pid))
        return -ESRCH;
    proc = get_proc(pid);
    if (proc->ppid != current && pid != current)
        return -EACCES;
    if (!is_pn_valid(pn))
        return -EINVAL;
    page = get_page(pn);
    if (page->type != PAGE_TYPE_FREE)
        return -ENOMEM;

    page->type = PAGE_TYPE_FRAME;
    page->owner = pid;
    page->refcnt = 1;
    proc->nr_pages += 1;
    return 0;
}
