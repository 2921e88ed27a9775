int noop(void)
{
    return 0;
}
