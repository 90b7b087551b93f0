public class ArrayMaxTest {
    static void check(boolean ok, String name) {
        if (!ok) {
            System.out.println("FAIL " + name);
            System.exit(1);
        }
    }

    public static void main(String[] args) {
        check(ArrayMax.max(new int[] {-5, -2, -9}) == -2, "negatives");
        check(ArrayMax.max(new int[] {1, 7, 3}) == 7, "mixed");
        check(ArrayMax.contains(new int[] {1, 2}, 2), "contains");
        check(!ArrayMax.contains(new int[] {1, 2}, 5), "absent");
        System.out.println("OK");
    }
}
