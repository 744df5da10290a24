// placeholder; the CLI is assembled after the numeric modules
int main() { return 0; }
