int add_nums(int a, int b) {
    return a + b;
}

int scale_sum(int a, int b, int k) {
    return k * add_nums(a, b);
}
