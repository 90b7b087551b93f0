public class FibTest {
    static void check(boolean ok, String name) {
        if (!ok) {
            System.out.println("FAIL " + name);
            System.exit(1);
        }
    }

    public static void main(String[] args) {
        check(Fib.fib(0) == 0L, "fib0");
        check(Fib.fib(1) == 1L, "fib1");
        check(Fib.fib(10) == 55L, "fib10");
        System.out.println("OK");
    }
}
