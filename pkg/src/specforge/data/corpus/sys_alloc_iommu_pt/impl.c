// guide: page table PTE formulas (IOMMU byte addresses), shadow metadata
int sys_alloc_iommu_pt(pn_t frm, size_t index, pn_t to, uint64_t perm)
{
    struct page *pt;
    struct page *page;

    if (!is_pn_valid(frm))
        return -EINVAL;
    pt = get_page(frm);
    if (pt->type != PAGE_TYPE_IOMMU_PT)
        return -EINVAL;
    if (pt->owner != current)
        return -EACCES;
    if (!is_idx_valid(index))
        return -EINVAL;
    if (pt->data[index] != 0)
        return -EBUSY;
    if (!is_pn_valid(to))
        return -EINVAL;
    page = get_page(to);
    if (page->type != PAGE_TYPE_FREE)
        return -ENOMEM;

    page->type = PAGE_TYPE_IOMMU_PT;
    page->owner = current;
    page->refcnt = 1;
    pt->data[index] = page_addr(to) | perm;
    return 0;
}
