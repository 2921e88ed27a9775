def sys_lseek(old, fd, offset):
    cond = z3.And(is_fd_valid(fd), offset >= 0)

    new = old.copy()
    new.procs[old.current].offs[fd] = offset
    return cond, util.If(cond, new, old)
