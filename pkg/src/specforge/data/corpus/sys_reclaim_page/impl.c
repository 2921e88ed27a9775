// guide: reference counting, shadow metadata
int sys_reclaim_page(pn_t pn)
{
    struct page *page;
    struct proc *owner;
    pid_t pid;

    if (!is_pn_valid(pn))
        return -EINVAL;
    page = get_page(pn);
    if (page->type == PAGE_TYPE_FREE)
        return -EINVAL;
    pid = page->owner;
    if (!is_pid_valid(pid))
        return -ESRCH;
    owner = get_proc(pid);
    if (owner->state != PROC_UNUSED)
        return -EBUSY;
    if (owner->ppid != current)
        return -EACCES;
    page->refcnt -= 1;
    if (page->refcnt != 0)
        return -EBUSY;

    page->type = PAGE_TYPE_FREE;
    page->owner = 0;
    owner->nr_pages -= 1;
    return 0;
}
