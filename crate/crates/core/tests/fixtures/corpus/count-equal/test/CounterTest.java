public class CounterTest {
    static void check(boolean ok, String name) {
        if (!ok) {
            System.out.println("FAIL " + name);
            System.exit(1);
        }
    }

    public static void main(String[] args) {
        check(Counter.countEqual(new int[] {1, 2, 1}, 1) == 2, "count");
        check(Counter.countEqual(new int[] {}, 1) == 0, "empty");
        check(Counter.firstIndex(new int[] {3, 1, 3}, 3) == 0, "first");
        System.out.println("OK");
    }
}
