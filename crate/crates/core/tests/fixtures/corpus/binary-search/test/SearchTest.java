public class SearchTest {
    static void check(boolean ok, String name) {
        if (!ok) {
            System.out.println("FAIL " + name);
            System.exit(1);
        }
    }

    public static void main(String[] args) {
        check(Search.indexOf(new int[] {1, 3, 5, 7}, 7) == 3, "last");
        check(Search.indexOf(new int[] {1, 3, 5, 7}, 1) == 0, "first");
        check(Search.indexOf(new int[] {4}, 4) == 0, "single");
        check(Search.indexOf(new int[] {1, 3}, 2) == -1, "missing");
        System.out.println("OK");
    }
}
