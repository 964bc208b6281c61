#include <stdlib.h>
#include <string.h>

void insertion_sort(int *a, size_t n) {
    size_t i;
    for (i = 1; i < n; i++) {
        int key = a[i];
        size_t j = i;
        while (j > 0 && a[j - 1] > key) {
            a[j] = a[j - 1];
            j--;
        }
        a[j] = key;
    }
}

static void merge_halves(int *a, int *tmp, size_t lo, size_t mid, size_t hi) {
    size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        tmp[k++] = (a[i] <= a[j]) ? a[i++] : a[j++];
    }
    while (i < mid) {
        tmp[k++] = a[i++];
    }
    while (j < hi) {
        tmp[k++] = a[j++];
    }
    memcpy(a + lo, tmp + lo, (hi - lo) * sizeof(int));
}

static void msort_range(int *a, int *tmp, size_t lo, size_t hi) {
    size_t mid;
    if (hi - lo < 2) {
        return;
    }
    mid = lo + (hi - lo) / 2;
    msort_range(a, tmp, lo, mid);
    msort_range(a, tmp, mid, hi);
    merge_halves(a, tmp, lo, mid, hi);
}

int merge_sort(int *a, size_t n) {
    int *tmp = malloc(n * sizeof(int));
    if (!tmp) {
        return -1;
    }
    msort_range(a, tmp, 0, n);
    free(tmp);
    return 0;
}

int is_sorted(const int *a, size_t n) {
    size_t i;
    for (i = 1; i < n; i++) {
        if (a[i - 1] > a[i]) {
            return 0;
        }
    }
    return 1;
}
